#include <floweval/oracle.hpp>

#include <floweval/element_set.hpp>
#include <floweval/image.hpp>
#include <floweval/mermaid.hpp>
#include <floweval/prompts.hpp>

#include "fixtures.hpp"

#include <doctest.h>

#include <memory>
#include <string>

using namespace floweval;
using namespace floweval::backends;

namespace {

struct World {
  ImageRef image;
  ElementSet gt;
  std::shared_ptr<OracleUniverse> universe;
};

World make_world(const std::string& source) {
  World world;
  world.image = image_from_bytes(source, "chart.mmd");
  world.gt = decompose(mermaid::parse_mermaid(source, mermaid::ParseMode::strict));
  world.universe = std::make_shared<OracleUniverse>();
  world.universe->add(world.image, world.gt);
  return world;
}

const std::string kSource =
    "flowchart TD\n"
    "  A[\"Collect input\"] -->|\"valid path\"| B[\"Transform records\"]\n"
    "  B --> C[\"Write output\"]\n";

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("ocr oracle answers with the chart text, one line each") {
    auto world = make_world(kSource);
    auto backend = oracle_ocr_backend(world.universe);
    auto response = backend->complete(world.image, std::string(prompts::ocr_prompt()));
    CHECK(response == "Collect input\nTransform records\nWrite output\nvalid path");
    CHECK(backend->id() == "oracle-ocr");
  }

  TEST_CASE("unknown digests read as text-free images") {
    auto world = make_world(kSource);
    auto backend = oracle_ocr_backend(world.universe);
    auto stranger = image_from_bytes("different bytes");
    CHECK(backend->complete(stranger, "x") == std::string(prompts::kNoTextSentinel));
  }

  TEST_CASE("full miss rate collapses to the sentinel") {
    auto world = make_world(kSource);
    OracleNoise noise;
    noise.ocr_miss_rate = 0.999999;
    auto backend = oracle_ocr_backend(world.universe, noise, 1);
    CHECK(backend->complete(world.image, "x") == std::string(prompts::kNoTextSentinel));
  }

  TEST_CASE("ocr misses are deterministic per seed") {
    auto chart = fixtures::make_chart(11, 40);
    World world = make_world(chart.source);
    OracleNoise noise;
    noise.ocr_miss_rate = 0.5;
    auto a1 = oracle_ocr_backend(world.universe, noise, 7)->complete(world.image, "x");
    auto a2 = oracle_ocr_backend(world.universe, noise, 7)->complete(world.image, "x");
    auto b = oracle_ocr_backend(world.universe, noise, 8)->complete(world.image, "x");
    CHECK(a1 == a2);
    CHECK(a1 != b);
    CHECK(oracle_ocr_backend(world.universe, noise, 7)->id() ==
          "oracle-ocr[fpr=0,fnr=0,miss=0.5,seed=7]");
  }

  TEST_CASE("ve oracle parses the wire prompt and answers by membership") {
    auto world = make_world(kSource);
    auto backend = oracle_ve_backend(world.universe);
    auto prompt = prompts::render_ve_prompt({
        "Collect input",                              // present node
        "Collect input -->|valid path| Transform records",  // present edge
        "Totally invented step",                      // absent
        "TRANSFORM RECORDS",                          // present after case fold
    });
    auto response = backend->complete(world.image, prompt);
    CHECK(response == "1. yes\n2. yes\n3. no\n4. yes");
  }

  TEST_CASE("ve oracle rejects prompts without a hypothesis section") {
    auto world = make_world(kSource);
    auto backend = oracle_ve_backend(world.universe);
    CHECK_THROWS_AS(backend->complete(world.image, "just some text"), std::invalid_argument);
  }

  TEST_CASE("forced error rates flip the expected side") {
    auto world = make_world(kSource);
    OracleNoise all_fn;
    all_fn.ve_fnr = 0.999999;
    auto fn_backend = oracle_ve_backend(world.universe, all_fn, 3);
    auto prompt = prompts::render_ve_prompt({"Collect input", "Made up thing"});
    CHECK(fn_backend->complete(world.image, prompt) == "1. no\n2. no");

    OracleNoise all_fp;
    all_fp.ve_fpr = 0.999999;
    auto fp_backend = oracle_ve_backend(world.universe, all_fp, 3);
    CHECK(fp_backend->complete(world.image, prompt) == "1. yes\n2. yes");
  }

  TEST_CASE("noise flips are stable per element across calls") {
    auto chart = fixtures::make_chart(21, 30);
    World world = make_world(chart.source);
    OracleNoise noise;
    noise.ve_fnr = 0.5;
    auto backend = oracle_ve_backend(world.universe, noise, 9);
    auto prompt = prompts::render_ve_prompt(chart.elements.rendered());
    auto first = backend->complete(world.image, prompt);
    auto second = backend->complete(world.image, prompt);
    CHECK(first == second);
  }

  TEST_CASE("noise rates validate their range") {
    OracleNoise bad;
    bad.ve_fpr = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.ocr_miss_rate = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_NOTHROW(OracleNoise{}.validate());
  }
}
