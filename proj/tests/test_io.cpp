#include "hybridclust/errors.hpp"
#include "hybridclust/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace hybridclust;

TEST_CASE("csv parsing") {
    const auto d = io::parse_csv("x,y\n1,2\n3.5, -4e1\n\n");
    CHECK(d.columns == std::vector<std::string>{"x", "y"});
    CHECK(d.points.rows() == 2);
    CHECK(d.points(1, 1) == -40.0);
    CHECK_FALSE(d.labels);

    const auto l = io::parse_csv("a,label\n0.5,2\n1.5,0\n");
    REQUIRE(l.labels);
    CHECK(*l.labels == std::vector<int>{2, 0});
    CHECK(l.points.cols() == 1);
}

TEST_CASE("csv errors name the row and column") {
    try {
        io::parse_csv("x,y\n1,2\n3,abc\n", "f.csv");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
    try {
        io::parse_csv("x,y\n1,2\n3\n", "f.csv");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("row 3: expected 2 cells, found 1") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_csv(""), ValidationError);
    CHECK_THROWS_AS(io::parse_csv("x\n"), ValidationError);
    CHECK_THROWS_AS(io::parse_csv("x,label\n1,0.5\n"), ValidationError);
}

TEST_CASE("bundled faithful data loads") {
    const auto d = io::read_csv(std::filesystem::path(HC_SOURCE_DIR) / "data" / "faithful.csv");
    CHECK(d.points.rows() == 272);
    CHECK(d.columns == std::vector<std::string>{"eruptions", "waiting"});
    CHECK(d.points(0, 0) == 3.6);
}

TEST_CASE("model json round trip") {
    DataMatrix x(6, 1);
    x << 0.0, 0.2, 0.1, 5.0, 5.3, 4.9;
    const FittedModel model = select_model(x, 1, 2, Criterion::bic, 0);
    const auto j = io::model_to_json(model, {{"seed", 0}});
    const auto text = j.dump(2);
    const auto loaded = io::model_from_json(nlohmann::json::parse(text));
    CHECK(loaded.mixture == model.mixture);
    CHECK(loaded.log_likelihood == model.log_likelihood);
    CHECK(loaded.metadata["seed"] == 0);
    CHECK_THROWS_AS(io::model_from_json(nlohmann::json::parse(R"({"d":1,"K":2,"coefs":[1],"means":[[0]],"covs":[[[1]]]})")),
                    ValidationError);
}

TEST_CASE("dendrogram outputs") {
    Dendrogram d{Measure::klinf, {{1, 0, 1, 3, 0.5, 2}, {2, 2, 3, 4, 1.5, 1}}};
    CHECK(io::dendrogram_to_csv(d) == "step,i,j,value,remaining\n1,0,1,0.5,2\n2,2,3,1.5,1\n");
    CHECK(io::elbow_to_csv(d) == "remaining,normalized_value\n2,0\n1,1\n");
    const auto j = io::dendrogram_to_json(d, {});
    CHECK(j["records"].size() == 2);
    CHECK(j["measure"] == "klinf");
}

TEST_CASE("atomic write replaces the file") {
    const auto dir = std::filesystem::temp_directory_path() / "hybridclust_io_test";
    std::filesystem::remove_all(dir);
    const auto p = dir / "sub" / "out.txt";
    io::write_file_atomic(p, "first");
    io::write_file_atomic(p, "second");
    CHECK(io::read_file(p) == "second");
    CHECK_FALSE(std::filesystem::exists(dir / "sub" / "out.txt.tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("doubles print in shortest round-trip form") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
}
