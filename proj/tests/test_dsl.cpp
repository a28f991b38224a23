// Copyright 2026 The omx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "omx/dsl.hpp"
#include "omx/report_json.hpp"

using namespace omx;

namespace {

std::string slurp(const std::string &rel) {
    std::ifstream f(std::string(OMX_SOURCE_DIR) + "/" + rel);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const char *kMinimal = R"(mode photon pA pol
mode photon pB pol
mode magnon mA
mode magnon mB
apply create(pA.V)
apply bs50(pA.V, pB.V)
measure
  bell pA pB
  target teleport mA mB
end
)";

dsl::ParseError parse_error(const std::string &src) {
    try {
        dsl::parse(src);
    } catch (const dsl::ParseError &e) {
        return e;
    }
    ADD_FAILURE() << "no parse error for: " << src;
    return dsl::ParseError(0, 0, "", "");
}

std::vector<dsl::Diagnostic> compile_errors(const std::string &src) {
    try {
        dsl::compile(src);
    } catch (const dsl::CompileError &e) {
        return e.diagnostics();
    }
    ADD_FAILURE() << "no compile error for: " << src;
    return {};
}

}  // namespace

TEST(Dsl, ParsesStructure) {
    auto ast = dsl::parse(kMinimal);
    ASSERT_EQ(ast.declarations.size(), 7u);
    EXPECT_TRUE(std::holds_alternative<dsl::ModeDecl>(ast.declarations[0]));
    const auto &el = std::get<dsl::ElementDecl>(ast.declarations[5]);
    EXPECT_EQ(el.name, "bs50");
    ASSERT_EQ(el.args.size(), 2u);
    EXPECT_EQ(std::get<dsl::ModeRef>(el.args[1]).str(), "pB.V");
    EXPECT_EQ(el.span.line, 6);
    EXPECT_EQ(el.span.column, 7);
    const auto &m = std::get<dsl::MeasureDecl>(ast.declarations[6]);
    EXPECT_EQ(m.lines.size(), 2u);
}

TEST(Dsl, ArityErrorAtClosingParen) {
    auto e = parse_error("apply bs50(pA.H)");
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 16);
    EXPECT_EQ(e.expected(), "second mode argument");
    EXPECT_EQ(e.found(), "')'");
}

TEST(Dsl, UnknownElementRejectedAtParse) {
    auto e = parse_error("mode photon A pol\napply mirror(A.H)\n");
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 7);
    EXPECT_EQ(e.expected(), "element name");
}

TEST(Dsl, ParseErrorsPointInsideSource) {
    const std::vector<std::string> bad = {
        "mode",
        "mode photon",
        "mode photon A",
        "mode photon A pol cutoff",
        "mode photon A pol cutoff=1.5\n",
        "apply hwp(A, 45 rad)",
        "apply hwp(A 45)",
        "apply stokes(A.V, A.X, m)",
        "set n_bar 0.2",
        "set alpha = 0.6 +",
        "set model = fast",
        "set colour = 1",
        "measure\n  bell B\nend",
        "measure\n  herald A\nend",
        "measure\n  target teleport\nend",
        "measure\n  bell B C\n",
        "hello",
        "apply create(A.V) extra",
        "set beta = 0.8é",
        "  @",
    };
    for (const auto &src : bad) {
        auto e = parse_error(src);
        ASSERT_GE(e.line(), 1) << src;
        ASSERT_GE(e.column(), 1) << src;
        // position names an existing character (possibly a newline)
        std::size_t offset = 0;
        for (int l = 1; l < e.line(); ++l) {
            offset = src.find('\n', offset) + 1;
        }
        offset += static_cast<std::size_t>(e.column() - 1);
        EXPECT_LT(offset, src.size()) << src << " -> " << e.what();
        EXPECT_NE(std::string(e.what()).find("expected"), std::string::npos);
    }
}

TEST(Dsl, EmptyProgramHasNoMeasurement) {
    auto d = compile_errors("");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].message, "no measurement block");
    d = compile_errors("# only a comment\n\n");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].message, "no measurement block");
}

TEST(Dsl, UndeclaredModeNamedWithSpan) {
    std::string src = kMinimal;
    src.replace(src.find("bs50(pA.V, pB.V)"), 16, "bs50(pA.V, pX.V)");
    auto d = compile_errors(src);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NE(d[0].message.find("pX.V"), std::string::npos);
    ASSERT_TRUE(d[0].span);
    EXPECT_EQ(d[0].span->line, 6);
    EXPECT_EQ(d[0].span->column, 18);
}

TEST(Dsl, AllSemanticErrorsReported) {
    auto d = compile_errors(R"(set thermal_cutoff = 3
mode photon A pol
mode magnon mA cutoff=2 thermal
mode magnon mA
apply create(Z.H)
apply hwp(Q, 1)
measure
  bell A A
  target swap mA
end
measure
end
)");
    std::vector<std::string> want = {"cutoff overflow", "declared twice", "Z.H", "Q", "two different paths",
                                     "takes 4 magnons", "more than one measurement block"};
    for (const auto &w : want) {
        bool found = false;
        for (const auto &x : d) {
            found = found || x.message.find(w) != std::string::npos;
        }
        EXPECT_TRUE(found) << "missing diagnostic: " << w;
    }
}

TEST(Dsl, ElementConstructionErrorsCarrySpan) {
    auto d = compile_errors(R"(mode photon A pol
mode magnon m cutoff=2
apply antistokes(A.V, m)
measure
  bell A A
  target teleport m m
end
)");
    ASSERT_FALSE(d.empty());
    EXPECT_NE(d[0].message.find("cutoff mismatch"), std::string::npos);
    EXPECT_EQ(d[0].span->line, 3);
}

TEST(Dsl, PolarizationRequiredForPhotonMode) {
    auto d = compile_errors("mode photon A pol\napply create(A)\nmeasure\nend\n");
    bool found = false;
    for (const auto &x : d) {
        found = found || x.message.find("needs a polarization") != std::string::npos;
    }
    EXPECT_TRUE(found);
}

TEST(Dsl, ComplexLiterals) {
    EXPECT_EQ(dsl::parse_complex("0.6"), cplx(0.6, 0.0));
    EXPECT_EQ(dsl::parse_complex("0.8i"), cplx(0.0, 0.8));
    EXPECT_EQ(dsl::parse_complex("-0.8i"), cplx(0.0, -0.8));
    EXPECT_EQ(dsl::parse_complex("0.3-0.2i"), cplx(0.3, -0.2));
    EXPECT_EQ(dsl::parse_complex("-1e-1+2E-1i"), cplx(-0.1, 0.2));
    EXPECT_THROW(dsl::parse_complex("0.3 0.2"), dsl::ParseError);
    EXPECT_EQ(dsl::format_complex(cplx(0.3, -0.2)), "0.3-0.2i");
}

TEST(Dsl, AnglesInDegreesOrRadians) {
    auto ast = dsl::parse("apply hwp(A, 45 deg)\napply hwp(A, 45deg)\napply qwp(A, -0.5)\n");
    EXPECT_EQ(std::get<dsl::NumberLit>(std::get<dsl::ElementDecl>(ast.declarations[0]).args[1]).radians(),
              deg_to_rad(45.0));
    EXPECT_EQ(ast.declarations[0], ast.declarations[1]);
    EXPECT_EQ(std::get<dsl::NumberLit>(std::get<dsl::ElementDecl>(ast.declarations[2]).args[1]).radians(), -0.5);
}

TEST(Dsl, EqualityIgnoresSpans) {
    auto a = dsl::parse("mode magnon m\n");
    auto b = dsl::parse("\n\n   mode   magnon m   # comment\n");
    EXPECT_EQ(a, b);
    EXPECT_NE(a, dsl::parse("mode magnon n\n"));
}

TEST(Dsl, RoundTripFixedPointOnShippedCircuits) {
    for (const char *file : {"circuits/teleport.omx", "circuits/swap.omx"}) {
        auto src = slurp(file);
        ASSERT_FALSE(src.empty()) << file;
        auto ast = dsl::parse(src);
        auto printed = dsl::print(ast);
        auto again = dsl::parse(printed);
        EXPECT_EQ(ast, again) << file;
        EXPECT_EQ(dsl::print(again), printed) << file;
    }
    auto odd = dsl::parse(
        "set alpha = -0.1+0.3i\nset n_bar = 1e-3\nmode magnon m cutoff=4 thermal=0.125\nmode photon X H\n"
        "apply phase(m, -3.5)\n");
    EXPECT_EQ(dsl::parse(dsl::print(odd)), odd);
}

TEST(Dsl, ShippedTeleportMatchesBuiltin) {
    auto plan = dsl::compile(slurp("circuits/teleport.omx"));
    auto q = InputQubit::from_amplitudes({0.6, 0.0}, {0.0, 0.8});
    auto a = report::to_json(execute(plan));
    auto b = report::to_json(teleport(q, {0.2, 2, true}));
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Dsl, ShippedSwapMatchesBuiltin) {
    auto plan = dsl::compile(slurp("circuits/swap.omx"));
    auto a = report::to_json(execute(plan));
    auto b = report::to_json(entanglement_swap({0.2, 2, true}));
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Dsl, PerModeThermalOverride) {
    auto plan = dsl::compile(R"(set n_bar = 0.2
mode photon A pol
mode photon B pol
mode photon C pol
mode magnon mA thermal
mode magnon mB thermal=0
measure
  bell B C
  target teleport mA mB
end
)");
    ASSERT_EQ(plan.thermal.size(), 2u);
    EXPECT_EQ(plan.thermal[0].n_bar, 0.2);
    EXPECT_EQ(plan.thermal[1].n_bar, 0.0);
    EXPECT_EQ(plan.registry.cutoff(plan.thermal[0].mode), 3);
}
