#include <gtest/gtest.h>

#include "gsmooth/core.hpp"

using namespace gsmooth;

namespace {

const Mode kAllModes[] = {Mode::kSP1, Mode::kSP2, Mode::kEP1, Mode::kEP2, Mode::kEPSP};

}  // namespace

TEST(ImageBuffer, SampleCountMatchesExtent) {
  ImageBuffer img(4, 3, 2, 0.25);
  EXPECT_EQ(img.size(), 24u);
  EXPECT_EQ(img.pixel_count(), 12u);
  img.at(3, 2, 1) = 0.5;
  EXPECT_EQ(img.samples().back(), 0.5);
}

TEST(ImageBuffer, RejectsBadShapes) {
  EXPECT_THROW(ImageBuffer(0, 3, 1, 0.0), DimensionError);
  EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<double>(3)), DimensionError);
}

TEST(ImageBuffer, ChannelExtraction) {
  ImageBuffer img(2, 2, 3, 0.0);
  for (std::size_t i = 0; i < img.size(); ++i) img.samples()[i] = static_cast<double>(i);
  const ImageBuffer g = img.channel(1);
  EXPECT_EQ(g.channels(), 1);
  EXPECT_EQ(g.at(1, 1, 0), 10.0);
}

TEST(Presets, Sp1MatchesTable) {
  PresetOverrides ov;
  ov.lambda = 1.25;
  const SmoothConfig c = mode_preset(Mode::kSP1, ov);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.data_penalty.a, 1e-3);
  EXPECT_EQ(c.smooth_penalty.a, 1e-3);
  EXPECT_EQ(c.data_penalty.b, 2.0);
  EXPECT_EQ(c.smooth_penalty.b, 2.0);
  EXPECT_EQ(c.data_nbr.radius, 1);
  EXPECT_EQ(c.smooth_nbr.radius, 1);
  EXPECT_EQ(c.iterations, 10);
  EXPECT_EQ(c.lambda, 1.25);
}

TEST(Presets, Ep1IsQuadraticEverywhere) {
  PresetOverrides ov;
  ov.lambda = 1.0;
  const SmoothConfig c = mode_preset(Mode::kEP1, ov);
  EXPECT_EQ(c.data_penalty.a, 2.0);
  EXPECT_EQ(c.data_penalty.b, 2.0);
  EXPECT_EQ(c.smooth_penalty.a, 2.0);
  EXPECT_EQ(c.smooth_penalty.b, 2.0);
  EXPECT_EQ(c.data_nbr.radius, 0);
  EXPECT_EQ(c.iterations, 1);
  EXPECT_EQ(c.alpha, 1.2);
}

TEST(Presets, EpspDepthConfiguration) {
  PresetOverrides ov;
  ov.lambda = 0.5;
  ov.b_d = 0.08;
  ov.b_s = 0.08;
  ov.r_d = 5;
  ov.r_s = 5;
  const SmoothConfig c = mode_preset(Mode::kEPSP, ov);
  EXPECT_EQ(c.data_penalty.b, 0.08);
  EXPECT_EQ(c.smooth_penalty.b, 0.08);
  EXPECT_EQ(c.data_nbr.radius, 5);
  EXPECT_EQ(c.smooth_nbr.radius, 5);
  EXPECT_EQ(c.data_sigma(), 5.0);
  EXPECT_EQ(c.smooth_sigma(), 5.0);
  EXPECT_EQ(c.iterations, 10);
}

TEST(Presets, Sp2AndEp2Rows) {
  const SmoothConfig sp2 = mode_preset(Mode::kSP2);
  EXPECT_EQ(sp2.alpha, 0.2);
  EXPECT_EQ(sp2.iterations, 1);
  const SmoothConfig ep2 = mode_preset(Mode::kEP2);
  EXPECT_EQ(ep2.data_penalty.a, 2.0);
  EXPECT_EQ(ep2.smooth_penalty.a, 1e-3);
  EXPECT_LT(ep2.smooth_penalty.b, 1.0);
  EXPECT_EQ(ep2.data_nbr.radius, 0);
}

TEST(Presets, TruncationDichotomy) {
  for (Mode m : kAllModes) {
    const SmoothConfig c = mode_preset(m);
    EXPECT_NO_THROW(c.validate());
    EXPECT_NO_THROW(c.data_penalty.validate());
    EXPECT_NO_THROW(c.smooth_penalty.validate());
    const bool data_truncates = m == Mode::kEPSP;
    const bool smooth_truncates = m == Mode::kEP2 || m == Mode::kEPSP;
    EXPECT_EQ(c.data_penalty.b < 1.0, data_truncates) << mode_name(m);
    EXPECT_EQ(c.data_penalty.b > 1.0, !data_truncates) << mode_name(m);
    EXPECT_EQ(c.smooth_penalty.b < 1.0, smooth_truncates) << mode_name(m);
    EXPECT_EQ(c.smooth_penalty.b > 1.0, !smooth_truncates) << mode_name(m);
    EXPECT_TRUE(c.data_nbr.include_center);
    EXPECT_FALSE(c.smooth_nbr.include_center);
  }
}

TEST(Presets, PureFunction) {
  PresetOverrides ov;
  ov.lambda = 0.3;
  for (Mode m : kAllModes) {
    const SmoothConfig a = mode_preset(m, ov), b = mode_preset(m, ov);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.data_penalty, b.data_penalty);
    EXPECT_EQ(a.smooth_penalty, b.smooth_penalty);
    EXPECT_EQ(a.data_nbr, b.data_nbr);
    EXPECT_EQ(a.smooth_nbr, b.smooth_nbr);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(Presets, FixedFieldOverrideNamesField) {
  PresetOverrides ov;
  ov.b_d = 0.5;
  try {
    mode_preset(Mode::kEP1, ov);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("b_d"), std::string::npos);
  }
  PresetOverrides alpha;
  alpha.alpha = 0.1;
  EXPECT_THROW(mode_preset(Mode::kEPSP, alpha), ConfigError);
  PresetOverrides rs;
  rs.r_s = 3;
  EXPECT_THROW(mode_preset(Mode::kSP1, rs), ConfigError);
  PresetOverrides rd;
  rd.r_d = 2;
  EXPECT_THROW(mode_preset(Mode::kEP2, rd), ConfigError);
}

TEST(Presets, TruncatingCellsMustStayBelowRange) {
  PresetOverrides ov;
  ov.b_s = 1.5;
  EXPECT_THROW(mode_preset(Mode::kEP2, ov), ConfigError);
  PresetOverrides r;
  r.r_d = 0;
  EXPECT_THROW(mode_preset(Mode::kEPSP, r), ConfigError);
}

TEST(Presets, StrideAppliesToBothNeighborhoods) {
  PresetOverrides ov;
  ov.r_d = 5;
  ov.r_s = 5;
  ov.stride = 2;
  const SmoothConfig c = mode_preset(Mode::kEPSP, ov);
  EXPECT_EQ(c.smooth_nbr.stride, 2);
  EXPECT_EQ(c.data_nbr.stride, 2);
  PresetOverrides ep2;
  ep2.r_s = 3;
  ep2.stride = 3;
  const SmoothConfig e = mode_preset(Mode::kEP2, ep2);
  EXPECT_EQ(e.smooth_nbr.stride, 3);
  EXPECT_EQ(e.data_nbr.stride, 1);
}

TEST(NeighborhoodSpec, StrideBounds) {
  EXPECT_THROW((NeighborhoodSpec{0, 2, true}).validate(), ConfigError);
  EXPECT_THROW((NeighborhoodSpec{1, 4, false}).validate(), ConfigError);
  EXPECT_NO_THROW((NeighborhoodSpec{1, 3, false}).validate());
}

TEST(ModeNames, RoundTrip) {
  for (Mode m : kAllModes) EXPECT_EQ(parse_mode(mode_name(m)), m);
  EXPECT_FALSE(parse_mode("ep3"));
}
