#include "xml_tree.hpp"

#include "partsim/config.hpp"

#include <expat.h>

#include <climits>
#include <type_traits>

namespace partsim::detail {

namespace {

struct ParserDeleter {
    void operator()(XML_Parser p) const { XML_ParserFree(p); }
};
using ParserHandle = std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter>;

struct BuildContext {
    XML_Parser parser = nullptr;
    std::unique_ptr<XmlElement> root;
    std::vector<XmlElement*> stack;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs)
{
    auto& ctx = *static_cast<BuildContext*>(user);
    auto element = std::make_unique<XmlElement>();
    element->name = name;
    element->line = XML_GetCurrentLineNumber(ctx.parser);
    for (int i = 0; attrs[i] != nullptr; i += 2) {
        element->attributes.emplace_back(attrs[i], attrs[i + 1]);
    }
    XmlElement* raw = element.get();
    if (ctx.stack.empty()) {
        ctx.root = std::move(element);
    } else {
        ctx.stack.back()->children.push_back(std::move(element));
    }
    ctx.stack.push_back(raw);
}

void on_end(void* user, const XML_Char*)
{
    static_cast<BuildContext*>(user)->stack.pop_back();
}

void on_text(void* user, const XML_Char* s, int len)
{
    auto& ctx = *static_cast<BuildContext*>(user);
    if (!ctx.stack.empty()) {
        ctx.stack.back()->text.append(s, static_cast<std::size_t>(len));
    }
}

}  // namespace

std::unique_ptr<XmlElement> parse_xml(std::string_view text)
{
    if (text.size() > static_cast<std::size_t>(INT_MAX)) {
        throw SyntaxError("XML document too large");
    }
    ParserHandle parser{XML_ParserCreate(nullptr)};
    if (!parser) {
        throw SyntaxError("cannot create XML parser");
    }
    BuildContext ctx;
    ctx.parser = parser.get();
    XML_SetUserData(parser.get(), &ctx);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);

    if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) == XML_STATUS_ERROR) {
        throw SyntaxError("line " + std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
                          XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
    if (!ctx.root) {
        throw SyntaxError("empty XML document");
    }
    return std::move(ctx.root);
}

}  // namespace partsim::detail
