#include <floweval/canonical.hpp>

#include <doctest.h>

using floweval::canonicalize_label;
using floweval::display_label;

TEST_SUITE("canonical") {
  TEST_CASE("whitespace collapses and trims") {
    CHECK(canonicalize_label("  Load\t\tthe   data \n") == "load the data");
    CHECK(canonicalize_label("single") == "single");
    CHECK(canonicalize_label("   ") == "");
    CHECK(canonicalize_label("") == "");
  }

  TEST_CASE("quote variants unify to ASCII apostrophe") {
    CHECK(canonicalize_label("Receive `arr` and `n`") == "receive 'arr' and 'n'");
    CHECK(canonicalize_label("Receive ~arr~") == "receive 'arr'");
    CHECK(canonicalize_label("Receive ‘arr’") == "receive 'arr'");
    CHECK(canonicalize_label("Say “hello”") == "say 'hello'");
  }

  TEST_CASE("surrounding quotes strip only when unambiguous") {
    CHECK(canonicalize_label("\"Load data\"") == "load data");
    CHECK(canonicalize_label("'Load data'") == "load data");
    CHECK(canonicalize_label("\"'nested'\"") == "nested");
    // The wrapping character reappears inside, so the pair is structural.
    CHECK(canonicalize_label("'a' and 'b'") == "'a' and 'b'");
    CHECK(canonicalize_label("\"she said \"hi\"\"") == "\"she said \"hi\"\"");
    // Mismatched ends are not a pair.
    CHECK(canonicalize_label("\"open only") == "\"open only");
    CHECK(canonicalize_label("'") == "'");
  }

  TEST_CASE("case folds to lower") {
    CHECK(canonicalize_label("Check If ARR[i] == i") == "check if arr[i] == i");
  }

  TEST_CASE("canonicalization is idempotent on tricky inputs") {
    const char* inputs[] = {
        "  \"Receive `arr` and `n`\"  ",
        "'a' and 'b'",
        "\"\"",
        "''x''",
        "MiXeD   CaSe\twith\nnewlines",
        "“double wrapped”",
    };
    for (const char* raw : inputs) {
      auto once = canonicalize_label(raw);
      CHECK(canonicalize_label(once) == once);
    }
  }

  TEST_CASE("display keeps case and strips one quote layer") {
    CHECK(display_label("  \"Receive 'arr' and 'n'\" ") == "Receive 'arr' and 'n'");
    CHECK(display_label("\"Yes\"") == "Yes");
    CHECK(display_label("Plain") == "Plain");
    CHECK(display_label("'a' and 'b'") == "'a' and 'b'");
  }

  TEST_CASE("canonicalizing the display form changes nothing") {
    const char* inputs[] = {
        "\"Check if arr[i] == i\"",
        "  `ticks`  ",
        "'single wrap'",
        "keep \"inner\" quotes",
    };
    for (const char* raw : inputs) {
      CHECK(canonicalize_label(display_label(raw)) == canonicalize_label(raw));
    }
  }
}
