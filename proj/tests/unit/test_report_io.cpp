#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "topswap/report_io.hpp"

using namespace topswap;

TEST_CASE("reals keep 17 digits") {
  for (double v : {0.1, 1.0 / 3, 2.1885389927113303, 1e-300, -7.25}) CHECK(std::stod(format_real(v)) == v);
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("csv quoting") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
  Table t{{"name", "value", "count", "ok"}, {}};
  t.add({std::string("x,y"), 0.5, std::int64_t{3}, true});
  std::ostringstream os;
  write_csv(t, os);
  CHECK(os.str() == "name,value,count,ok\n\"x,y\",0.5,3,true\n");
}

TEST_CASE("json mirrors the csv fields") {
  Table t{{"chain", "gap", "n", "converged"}, {}};
  t.add({std::string("top_swap_k"), 0.125, std::int64_t{2}, true});
  t.add({std::string("top_swap_k"), std::numeric_limits<double>::infinity(), std::int64_t{3}, false});
  std::ostringstream os;
  write_table(t, OutputFormat::Json, os);
  const auto j = nlohmann::json::parse(os.str());
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0]["chain"] == "top_swap_k");
  CHECK(j[0]["gap"] == 0.125);
  CHECK(j[0]["n"] == 2);
  CHECK(j[0]["converged"] == true);
  CHECK(j[1]["gap"] == "inf");
  std::vector<std::string> keys;
  for (auto it = j[0].begin(); it != j[0].end(); ++it) keys.push_back(it.key());
  CHECK(keys.size() == 4);
}
