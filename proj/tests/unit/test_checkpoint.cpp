#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "lagcn/checkpoint.hpp"
#include "lagcn/error.hpp"

namespace lagcn {
namespace {

template <typename T>
Checkpoint round_trip(const T& model) {
    std::stringstream buf;
    write_checkpoint(buf, to_checkpoint(model));
    return read_checkpoint(buf);
}

TEST(Checkpoint, EdgeClassifierRoundTripIsExact) {
    TrainConfig cfg;
    cfg.hidden_widths = {7, 3};
    cfg.proj_dim = 5;
    cfg.seed = 12;
    const EdgeClassifier c = EdgeClassifier::initialize(4, cfg);
    EXPECT_EQ(edge_classifier_from(round_trip(c)), c);
}

TEST(Checkpoint, ModelsRoundTripExactly) {
    FitConfig cfg;
    cfg.seed = 3;
    cfg.norm = Normalization::symmetric;
    SgcModel s = sgc_initialize(6, 3, 4, cfg);
    s.norm = Normalization::symmetric;
    s.weights(0, 0) = 1.0 / 3.0;
    EXPECT_EQ(sgc_model_from(round_trip(s)), s);
    const GcnModel g = gcn_initialize(6, 3, cfg);
    EXPECT_EQ(gcn_model_from(round_trip(g)), g);
}

TEST(Checkpoint, KindMismatchAndCorruption) {
    const SgcModel s = sgc_initialize(2, 2, 2, {});
    EXPECT_THROW(gcn_model_from(round_trip(s)), Error);
    std::stringstream bad("not-a-checkpoint\n");
    EXPECT_THROW(read_checkpoint(bad), Error);
    std::stringstream buf;
    write_checkpoint(buf, to_checkpoint(s));
    std::string text = buf.str();
    std::stringstream truncated(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_checkpoint(truncated), Error);
}

TEST(Checkpoint, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "lagcn_ckpt_test.txt";
    const GcnModel g = gcn_initialize(3, 2, {});
    save_checkpoint(path, to_checkpoint(g));
    EXPECT_EQ(gcn_model_from(load_checkpoint(path)), g);
    std::filesystem::remove(path);
}

TEST(Checkpoint, Predictions) {
    std::ostringstream out;
    write_predictions(out, {2, 0, 1});
    EXPECT_EQ(out.str(), "0\t2\n1\t0\n2\t1\n");
}

} // namespace
} // namespace lagcn
