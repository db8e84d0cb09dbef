#include "hapi/error.hpp"
#include "hapi/model/api_model.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <set>
#include <utility>

namespace hapi::model
{
namespace
{
enum class TokKind : std::uint8_t
{
    ident,
    number,
    punct,
    end,
};

struct Token
{
    TokKind     kind = TokKind::end;
    std::string text;
    std::size_t line   = 1;
    std::size_t column = 1;
};

class Lexer
{
public:
    explicit Lexer(std::string_view src)
    : m_src(src)
    {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        bool               line_start = true;
        while(m_pos < m_src.size())
        {
            char c = m_src[m_pos];
            if(c == '\n')
            {
                advance();
                line_start = true;
                continue;
            }
            if(std::isspace(static_cast<unsigned char>(c)))
            {
                advance();
                continue;
            }
            if(c == '#' && line_start)
            {
                skip_directive();
                continue;
            }
            line_start = false;
            if(c == '/' && peek(1) == '/')
            {
                while(m_pos < m_src.size() && m_src[m_pos] != '\n') advance();
                continue;
            }
            if(c == '/' && peek(1) == '*')
            {
                const auto line = m_line, col = m_col;
                advance();
                advance();
                while(m_pos < m_src.size() && !(m_src[m_pos] == '*' && peek(1) == '/')) advance();
                if(m_pos >= m_src.size()) throw ParseError(line, col, "unterminated comment");
                advance();
                advance();
                continue;
            }
            Token t;
            t.line   = m_line;
            t.column = m_col;
            if(std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            {
                t.kind = TokKind::ident;
                while(m_pos < m_src.size() &&
                      (std::isalnum(static_cast<unsigned char>(m_src[m_pos])) || m_src[m_pos] == '_'))
                    t.text += take();
            }
            else if(std::isdigit(static_cast<unsigned char>(c)))
            {
                t.kind = TokKind::number;
                while(m_pos < m_src.size() &&
                      (std::isalnum(static_cast<unsigned char>(m_src[m_pos]))))
                    t.text += take();
            }
            else if(std::string_view("*;,(){}=-").find(c) != std::string_view::npos)
            {
                t.kind = TokKind::punct;
                t.text = std::string(1, take());
            }
            else
            {
                throw ParseError(m_line, m_col, fmt::format("unexpected character '{}'", c));
            }
            out.push_back(std::move(t));
        }
        Token eof;
        eof.kind   = TokKind::end;
        eof.line   = m_line;
        eof.column = m_col;
        out.push_back(std::move(eof));
        return out;
    }

private:
    char peek(std::size_t ahead) const
    {
        return m_pos + ahead < m_src.size() ? m_src[m_pos + ahead] : '\0';
    }

    void advance()
    {
        if(m_src[m_pos] == '\n')
        {
            ++m_line;
            m_col = 1;
        }
        else
            ++m_col;
        ++m_pos;
    }

    char take()
    {
        char c = m_src[m_pos];
        advance();
        return c;
    }

    void skip_directive()
    {
        while(m_pos < m_src.size())
        {
            if(m_src[m_pos] == '\\' && peek(1) == '\n')
            {
                advance();
                advance();
                continue;
            }
            if(m_src[m_pos] == '\n') break;
            advance();
        }
    }

    std::string_view m_src;
    std::size_t      m_pos  = 0;
    std::size_t      m_line = 1;
    std::size_t      m_col  = 1;
};

std::string canonical_type(const std::vector<Token>& words)
{
    bool        is_const = false;
    int         stars    = 0;
    std::string base;
    for(const auto& w : words)
    {
        if(w.text == "*")
            ++stars;
        else if(w.text == "const")
            is_const = true;
        else if(w.text == "struct" || w.text == "enum")
            continue;
        else
        {
            if(!base.empty()) base += ' ';
            base += w.text;
        }
    }
    return fmt::format("{}{}{}", is_const ? "const " : "", base, std::string(stars, '*'));
}

class Parser
{
public:
    Parser(std::vector<Token> toks, ApiModel& model)
    : m_toks(std::move(toks))
    , m_model(model)
    {}

    void run()
    {
        while(cur().kind != TokKind::end)
        {
            if(is("typedef"))
                parse_typedef();
            else if((is("enum") || is("struct")) && starts_definition())
            {
                bool is_enum = is("enum");
                next();
                Token tag = expect_ident("type name");
                if(is_enum)
                    parse_enum_body(tag);
                else
                    parse_struct_body(tag);
                expect(";");
            }
            else
                parse_function();
        }
    }

private:
    const Token& cur() const { return m_toks[m_pos]; }
    const Token& at(std::size_t ahead) const
    {
        return m_toks[std::min(m_pos + ahead, m_toks.size() - 1)];
    }
    bool is(std::string_view text) const
    {
        return cur().kind != TokKind::end && cur().text == text;
    }
    const Token& next() { return m_toks[m_pos++]; }

    [[noreturn]] void fail(const Token& t, const std::string& what) const
    {
        throw ParseError(t.line, t.column, what);
    }

    [[noreturn]] void unexpected(std::string_view wanted) const
    {
        if(cur().kind == TokKind::end)
            fail(cur(), fmt::format("unexpected end of input, expected {}", wanted));
        fail(cur(), fmt::format("expected {}, found '{}'", wanted, cur().text));
    }

    void expect(std::string_view punct)
    {
        if(cur().kind != TokKind::punct || cur().text != punct)
            unexpected(fmt::format("'{}'", punct));
        next();
    }

    Token expect_ident(std::string_view what)
    {
        if(cur().kind != TokKind::ident) unexpected(what);
        return next();
    }

    // `enum X {` or `struct X {`
    bool starts_definition() const
    {
        return at(1).kind == TokKind::ident && at(2).kind == TokKind::punct && at(2).text == "{";
    }

    void declare_type(const Token& name)
    {
        if(!m_type_names.insert(name.text).second)
            fail(name, fmt::format("duplicate type name '{}'", name.text));
    }

    void parse_typedef()
    {
        next();
        if(is("void"))
        {
            next();
            expect("*");
            Token name = expect_ident("handle type name");
            expect(";");
            declare_type(name);
            m_model.handles.push_back(name.text);
            return;
        }
        if(is("struct") || is("enum"))
        {
            bool is_enum = is("enum");
            next();
            if(cur().kind == TokKind::ident) next();  // tag, ignored
            if(!is_enum && is("*"))
            {
                next();
                Token name = expect_ident("handle type name");
                expect(";");
                declare_type(name);
                m_model.handles.push_back(name.text);
                return;
            }
            if(!is("{")) unexpected("'{' or '*'");
            // body first, name after: parse into a placeholder then rename
            std::size_t body_pos = m_pos;
            skip_braces();
            Token name = expect_ident("typedef name");
            expect(";");
            std::size_t resume = m_pos;
            m_pos              = body_pos;
            if(is_enum)
                parse_enum_body(name);
            else
                parse_struct_body(name);
            m_pos = resume;
            return;
        }
        fail(cur(), "unsupported typedef (expected 'void*', 'struct' or 'enum')");
    }

    void skip_braces()
    {
        int depth = 0;
        do
        {
            if(cur().kind == TokKind::end) unexpected("'}'");
            if(is("{")) ++depth;
            if(is("}")) --depth;
            next();
        } while(depth > 0);
    }

    std::int64_t parse_number(const Token& t) const
    {
        std::string text = t.text;
        while(!text.empty() && (text.back() == 'u' || text.back() == 'U' || text.back() == 'l' ||
                                text.back() == 'L'))
            text.pop_back();
        int         base  = 10;
        std::size_t start = 0;
        if(text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        {
            base  = 16;
            start = 2;
        }
        std::uint64_t v   = 0;
        auto          res = std::from_chars(text.data() + start, text.data() + text.size(), v, base);
        if(res.ec != std::errc{} || res.ptr != text.data() + text.size())
            fail(t, fmt::format("bad integer literal '{}'", t.text));
        return static_cast<std::int64_t>(v);
    }

    void parse_enum_body(const Token& name)
    {
        declare_type(name);
        expect("{");
        EnumDef      def{name.text, {}};
        std::int64_t value = 0;
        while(!is("}"))
        {
            Token c = expect_ident("enumerator");
            if(is("="))
            {
                next();
                bool neg = false;
                if(is("-"))
                {
                    next();
                    neg = true;
                }
                if(cur().kind != TokKind::number) unexpected("integer literal");
                value = parse_number(next());
                if(neg) value = -value;
            }
            for(const auto& e : def.constants)
                if(e.name == c.text) fail(c, fmt::format("duplicate enumerator '{}'", c.text));
            def.constants.push_back({c.text, value});
            ++value;
            if(is(","))
                next();
            else if(!is("}"))
                unexpected("',' or '}'");
        }
        expect("}");
        m_model.enums.push_back(std::move(def));
    }

    void parse_struct_body(const Token& name)
    {
        declare_type(name);
        expect("{");
        StructDef def{name.text, {}};
        while(!is("}"))
        {
            std::vector<Token> words;
            while(cur().kind == TokKind::ident || is("*")) words.push_back(next());
            if(words.size() < 2 || words.back().kind != TokKind::ident)
                unexpected("field declaration");
            Token field = words.back();
            words.pop_back();
            expect(";");
            auto type = resolve(words);
            StructField f;
            f.name = field.text;
            if(type.is_address())
            {
                f.kind  = ScalarKind::address;
                f.width = 8;
            }
            else if(type.category == TypeInfo::Category::scalar ||
                    type.category == TypeInfo::Category::enumeration)
            {
                f.kind  = type.scalar_kind;
                f.width = type.width;
            }
            else
                fail(words.front(), "struct fields must be scalars, enums, handles or pointers");
            if(f.name == "pNext" && !def.fields.empty())
                fail(field, "pNext must be the first field");
            for(const auto& other : def.fields)
                if(other.name == f.name) fail(field, fmt::format("duplicate field '{}'", f.name));
            def.fields.push_back(std::move(f));
        }
        expect("}");
        m_model.structs.push_back(std::move(def));
    }

    TypeInfo resolve(const std::vector<Token>& words)
    {
        if(words.empty()) unexpected("type");
        try
        {
            return resolve_type(m_model, canonical_type(words));
        } catch(const ModelError& e)
        {
            fail(words.front(), e.what());
        }
    }

    void parse_function()
    {
        std::vector<Token> words;
        while(cur().kind == TokKind::ident || is("*")) words.push_back(next());
        if(words.size() < 2 || words.back().kind != TokKind::ident)
            unexpected("function declaration");
        Token fname = words.back();
        words.pop_back();
        expect("(");

        FunctionDecl fn;
        fn.name        = fname.text;
        fn.return_type = canonical_type(words);
        resolve(words);

        if(is("void") && at(1).text == ")" && at(1).kind == TokKind::punct)
            next();
        else if(!is(")"))
        {
            while(true)
            {
                std::vector<Token> pw;
                while(cur().kind == TokKind::ident || is("*")) pw.push_back(next());
                if(pw.size() < 2 || pw.back().kind != TokKind::ident) unexpected("parameter");
                Token pname = pw.back();
                pw.pop_back();
                auto      type = resolve(pw);
                ParamDecl p;
                p.name      = pname.text;
                p.c_type    = canonical_type(pw);
                p.is_handle = type.category == TypeInfo::Category::handle && type.pointer_depth == 0;
                if(type.category == TypeInfo::Category::void_type && type.pointer_depth == 0)
                    fail(pw.front(), "void parameter");
                if(type.category == TypeInfo::Category::structure && type.pointer_depth == 0)
                    fail(pw.front(), "struct passed by value is not supported");
                if(fn.find_param(p.name))
                    fail(pname, fmt::format("duplicate parameter '{}'", p.name));
                fn.params.push_back(std::move(p));
                if(is(","))
                {
                    next();
                    continue;
                }
                break;
            }
        }
        expect(")");
        expect(";");
        if(m_model.find_function(fn.name))
            fail(fname, fmt::format("duplicate function name '{}'", fn.name));
        m_model.functions.push_back(std::move(fn));
    }

    std::vector<Token>    m_toks;
    std::size_t           m_pos = 0;
    ApiModel&             m_model;
    std::set<std::string> m_type_names;
};
}  // namespace

ApiModel parse_header_decls(std::string_view source_text, std::string api_name, std::string version)
{
    ApiModel model;
    model.api_name = std::move(api_name);
    model.version  = std::move(version);
    Parser parser(Lexer(source_text).run(), model);
    parser.run();
    return model;
}
}  // namespace hapi::model
