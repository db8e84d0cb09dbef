#include "hapi/error.hpp"
#include "hapi/mock/bundled.hpp"
#include "hapi/model/api_model.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace hapi;
using namespace hapi::model;

namespace
{
const ApiModel& plain() { return mock::mock_model(schema::Scenario::automatic); }
const ApiModel& hybrid() { return mock::mock_model(schema::Scenario::hybrid); }

const ParamDecl& param(const ApiModel& m, std::string_view fn, std::string_view p)
{
    const auto* f = m.find_function(fn);
    EXPECT_NE(f, nullptr) << fn;
    const auto* d = f->find_param(p);
    EXPECT_NE(d, nullptr) << fn << "." << p;
    return *d;
}
}  // namespace

TEST(HeaderParser, MinimalGrammarCase)
{
    const auto m = parse_header_decls("typedef void* ze_handle_t; int zeMemFree(ze_handle_t h);");
    ASSERT_EQ(m.functions.size(), 1u);
    const auto& f = m.functions[0];
    EXPECT_EQ(f.name, "zeMemFree");
    EXPECT_EQ(f.return_type, "int");
    ASSERT_EQ(f.params.size(), 1u);
    EXPECT_EQ(f.params[0].name, "h");
    EXPECT_TRUE(f.params[0].is_handle);
    EXPECT_EQ(f.params[0].direction, Direction::unknown);
}

TEST(HeaderParser, MockHeaderShape)
{
    const auto& m = plain();
    EXPECT_EQ(m.api_name, "ze");
    EXPECT_EQ(m.functions.size(), 13u);
    EXPECT_EQ(m.handles.size(), 3u);
    EXPECT_TRUE(m.is_handle_type("ze_event_handle_t"));
    for(const auto& f : m.functions)
        for(const auto& p : f.params) EXPECT_EQ(p.direction, Direction::unknown) << f.name << "." << p.name;

    const auto* res = m.find_enum("ze_result_t");
    ASSERT_NE(res, nullptr);
    auto it = std::find_if(res->constants.begin(), res->constants.end(),
                           [](const EnumConstant& c) { return c.name == "ZE_RESULT_ERROR_UNINITIALIZED"; });
    ASSERT_NE(it, res->constants.end());
    EXPECT_EQ(it->value, 0x78000001);
}

TEST(HeaderParser, StructLayoutUsesNaturalAlignment)
{
    const auto* s = plain().find_struct("ze_device_properties_t");
    ASSERT_NE(s, nullptr);
    ASSERT_EQ(s->fields.size(), 6u);
    EXPECT_EQ(s->fields[0].name, "pNext");
    EXPECT_EQ(s->fields[0].kind, ScalarKind::address);
    // pointer at 0, four u32 at 8..24, u64 at 24: 32 bytes.
    EXPECT_EQ(struct_offsets(*s), (std::vector<std::uint64_t>{0, 8, 12, 16, 20, 24}));
    EXPECT_EQ(struct_size(*s), 32u);

    const StructDef padded{"p", {{"a", ScalarKind::u64, 1}, {"b", ScalarKind::u64, 8}, {"c", ScalarKind::u64, 2}}};
    EXPECT_EQ(struct_offsets(padded), (std::vector<std::uint64_t>{0, 8, 16}));
    EXPECT_EQ(struct_size(padded), 24u);
}

TEST(HeaderParser, ErrorCarriesPosition)
{
    try
    {
        parse_header_decls("typedef void* h_t;\nint f(h_t x\n");
        FAIL() << "expected ParseError";
    } catch(const ParseError& e)
    {
        EXPECT_GE(e.line(), 2u);
        EXPECT_GE(e.column(), 1u);
    }
}

TEST(HeaderParser, SkipsPreprocessorAndComments)
{
    const auto m = parse_header_decls("#include <stdint.h>\n/* c */ // d\ntypedef struct _x* x_t;\nvoid g(x_t a);\n");
    ASSERT_EQ(m.functions.size(), 1u);
    EXPECT_EQ(m.functions[0].return_type, "void");
}

TEST(TypeResolution, PointersHandlesAndStrings)
{
    const auto& m = plain();
    const auto  h = resolve_type(m, "ze_event_handle_t");
    EXPECT_EQ(h.category, TypeInfo::Category::handle);
    EXPECT_TRUE(h.is_address());

    const auto ph = resolve_type(m, "ze_event_handle_t*");
    EXPECT_EQ(ph.pointer_depth, 1);
    EXPECT_EQ(pointee_size(m, "ze_event_handle_t*"), 8u);

    const auto s = resolve_type(m, "const char*");
    EXPECT_TRUE(s.is_c_string());

    EXPECT_EQ(resolve_type(m, "uint32_t").width, 4u);
    EXPECT_THROW(resolve_type(m, "no_such_type"), ModelError);
}

TEST(MetaParams, OverlayFillsDirectionsAndAttrs)
{
    const auto& m = hybrid();
    EXPECT_EQ(param(m, "zeMockMemAlloc", "pptr").direction, Direction::out);
    EXPECT_EQ(param(m, "zeMockMemAlloc", "size").direction, Direction::in);  // value param of a touched fn
    EXPECT_EQ(param(m, "zeMockDeviceGetProperties", "pDeviceProperties").direction, Direction::inout);

    const auto& waits = param(m, "zeMockCommandListAppendMemoryCopy", "phWaitEvents");
    ASSERT_TRUE(waits.deref.has_value());
    EXPECT_EQ(waits.deref->kind, DerefKind::array);
    EXPECT_EQ(waits.deref->length_param, "numWaitEvents");
    EXPECT_TRUE(waits.deref->element_count);

    EXPECT_TRUE(m.find_function("zeMockCommandListExecute")->attrs.has(FunctionAttr::profiled));
    EXPECT_TRUE(m.find_function("zeMockEventHostSynchronize")->attrs.has(FunctionAttr::default_excluded));
    EXPECT_TRUE(m.find_function("zeMockEventCreate")->attrs.has(FunctionAttr::creates_handle));
    EXPECT_TRUE(m.find_function("zeMockEventDestroy")->attrs.has(FunctionAttr::releases_handle));
}

TEST(MetaParams, FlagRoundTrip)
{
    const auto meta = load_meta_params_yaml("functions:\n  - name: zeMockMemFree\n    attrs: [default_excluded]\n");
    const auto m    = apply_meta_params(plain(), meta);
    EXPECT_TRUE(m.find_function("zeMockMemFree")->attrs.has(FunctionAttr::default_excluded));
    EXPECT_FALSE(plain().find_function("zeMockMemFree")->attrs.has(FunctionAttr::default_excluded));
}

TEST(MetaParams, DanglingReferencesAreErrors)
{
    EXPECT_THROW(apply_meta_params(plain(), load_meta_params_yaml("functions:\n  - name: zeNope\n")), ModelError);
    EXPECT_THROW(apply_meta_params(plain(), load_meta_params_yaml("functions:\n  - name: zeMockMemFree\n"
                                                                  "    params:\n      - {name: nope, direction: in}\n")),
                 ModelError);
}

TEST(MetaParams, ExclusiveModeFlagsConflict)
{
    const auto meta = load_meta_params_yaml(
        "functions:\n  - name: zeMockMemFree\n    attrs: [default_excluded, minimal_included]\n");
    EXPECT_ANY_THROW(apply_meta_params(plain(), meta));
}

TEST(MetaParams, BadYamlNamesThePath)
{
    try
    {
        load_meta_params_yaml("functions:\n  - name: f\n    params:\n      - {name: p, direction: sideways}\n");
        FAIL() << "expected SchemaError";
    } catch(const SchemaError& e)
    {
        EXPECT_NE(e.path().find("direction"), std::string::npos) << e.path();
    }
}

TEST(ModelYaml, RoundTripIsIdentity)
{
    for(const auto* m : {&plain(), &hybrid()})
    {
        const auto text = to_yaml(*m);
        EXPECT_EQ(load_api_model_yaml(text), *m);
        EXPECT_EQ(to_yaml(load_api_model_yaml(text)), text);
    }
}

TEST(ModelYaml, FingerprintTracksContent)
{
    EXPECT_EQ(model_fingerprint(plain()), model_fingerprint(load_api_model_yaml(to_yaml(plain()))));
    EXPECT_NE(model_fingerprint(plain()), model_fingerprint(hybrid()));
    auto m = hybrid();
    m.functions[0].attrs.set(FunctionAttr::default_excluded);
    EXPECT_NE(model_fingerprint(m), model_fingerprint(hybrid()));
}

TEST(ModelValidation, DuplicateFunctionRejected)
{
    auto m = plain();
    m.functions.push_back(m.functions.front());
    EXPECT_THROW(validate_model(m), ModelError);
}

TEST(ModelValidation, ArrayLengthMustNameAParam)
{
    auto  m = hybrid();
    auto& f = *std::find_if(m.functions.begin(), m.functions.end(),
                            [](const FunctionDecl& d) { return d.name == "zeMockCommandListAppendMemoryCopy"; });
    for(auto& p : f.params)
        if(p.name == "phWaitEvents") p.deref->length_param = "missing";
    EXPECT_ANY_THROW(validate_model(m));
}

TEST(ModelValidation, BundledModelsAreValid)
{
    EXPECT_NO_THROW(validate_model(plain()));
    EXPECT_NO_THROW(validate_model(hybrid()));
}

TEST(EnumStrings, RoundTrip)
{
    for(auto d : {Direction::in, Direction::out, Direction::inout, Direction::unknown})
        EXPECT_EQ(direction_from_string(to_string(d)), d);
    for(auto a : all_function_attrs) EXPECT_EQ(attr_from_string(to_string(a)), a);
    EXPECT_FALSE(attr_from_string("bogus"));
}
