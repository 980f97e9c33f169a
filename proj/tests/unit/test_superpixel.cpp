#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "salfuse/error.hpp"
#include "salfuse/superpixel.hpp"
#include "synthetic.hpp"

using namespace salfuse;

namespace {

Image scene_lab(int h, int w, std::uint64_t seed) {
  return rgb_to_lab(synth::blob_scene(h, w, seed).image);
}

void expect_valid(const Segmentation& seg, const Image& lab) {
  const int k = seg.num_superpixels;
  ASSERT_EQ(seg.labels.size(), static_cast<std::size_t>(seg.height) * seg.width);
  for (int l : seg.labels) {
    ASSERT_GE(l, 0);
    ASSERT_LT(l, k);
  }
  EXPECT_EQ(std::accumulate(seg.area_px.begin(), seg.area_px.end(), std::size_t{0}),
            seg.labels.size());
  for (int c : synth::component_counts(seg)) EXPECT_EQ(c, 1);

  std::vector<std::array<double, 3>> sum(k, {0, 0, 0});
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) sum[seg.label(r, c)][ch] += lab.at(r, c, ch);
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int ch = 0; ch < 3; ++ch) {
      EXPECT_NEAR(seg.mean_lab[i][ch], sum[i][ch] / static_cast<double>(seg.area_px[i]), 1e-9);
    }
  }
}

}  // namespace

TEST(Slic, GridInterval) {
  EXPECT_DOUBLE_EQ(slic_grid_interval(224, 224, 100), 22.4);
}

TEST(Slic, UniformImageGivesFourEqualQuadrants) {
  const Image lab = synth::constant_lab(64, 64, {40, 10, -5});
  const Segmentation seg = slic(lab, {.n_target = 4});
  ASSERT_EQ(seg.num_superpixels, 4);
  for (auto a : seg.area_px) EXPECT_EQ(a, 1024u);
  // each quadrant is one label
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      EXPECT_EQ(seg.label(r, c), seg.label(r < 32 ? 0 : 63, c < 32 ? 0 : 63));
    }
  }
}

TEST(Slic, TwoToneBoundaryFollowsColorEdge) {
  const Image lab = synth::two_tone_lab(8, 8, {50, 0, 0}, {80, 0, 0});
  SlicTrace trace;
  const SlicParams params{.n_target = 2, .compactness = 10, .iters = 10};
  const Segmentation seg = slic(lab, params, &trace);
  ASSERT_EQ(seg.num_superpixels, 2);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      EXPECT_EQ(seg.label(r, c) == seg.label(0, 0), c < 4) << r << "," << c;
    }
  }

  // Oracle: at convergence every pixel's exhaustive SLIC argmin over the
  // final centers is its own label.
  const int k = trace.seeds;
  std::vector<std::array<double, 5>> sum(k, {0, 0, 0, 0, 0});
  std::vector<double> cnt(k, 0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      const int l = trace.raw_labels[r * 8 + c];
      for (int ch = 0; ch < 3; ++ch) sum[l][ch] += lab.at(r, c, ch);
      sum[l][3] += r;
      sum[l][4] += c;
      cnt[l] += 1;
    }
  }
  const double s = std::sqrt(64.0 / 2.0);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        if (cnt[j] == 0) continue;
        double dl = 0;
        for (int ch = 0; ch < 3; ++ch) {
          const double d = lab.at(r, c, ch) - sum[j][ch] / cnt[j];
          dl += d * d;
        }
        const double dr = r - sum[j][3] / cnt[j], dc = c - sum[j][4] / cnt[j];
        const double d = dl + (dr * dr + dc * dc) / (s * s) * 100.0;
        if (d < bd) {
          bd = d;
          best = j;
        }
      }
      EXPECT_EQ(best, trace.raw_labels[r * 8 + c]);
    }
  }
}

TEST(Slic, InvariantsOnSyntheticScenes) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Image lab = scene_lab(60 + 7 * static_cast<int>(seed), 80, seed);
    for (int n : {10, 50, 120}) {
      SlicTrace trace;
      const Segmentation seg = slic(lab, {.n_target = n}, &trace);
      expect_valid(seg, lab);
      EXPECT_GE(seg.num_superpixels, n / 2);
      EXPECT_LE(seg.num_superpixels, 2 * n);
      for (std::size_t i = 1; i < trace.energy.size(); ++i) {
        EXPECT_LE(trace.energy[i], trace.energy[i - 1] * (1 + 1e-12));
      }
    }
  }
}

TEST(Slic, CountGrowsWithTarget) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Image lab = scene_lab(96, 128, seed);
    int prev = 0;
    for (int n : {4, 8, 16, 32, 64, 100, 150, 200, 300, 400}) {
      const int k = slic(lab, {.n_target = n}).num_superpixels;
      EXPECT_GE(k, prev) << "n=" << n;
      prev = k;
    }
  }
}

TEST(Slic, Deterministic) {
  const Image lab = scene_lab(70, 90, 5);
  const Segmentation a = slic(lab, {.n_target = 60});
  const Segmentation b = slic(lab, {.n_target = 60});
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.mean_lab, b.mean_lab);
}

TEST(Slic, Errors) {
  const Image lab = synth::constant_lab(4, 4, {50, 0, 0});
  auto code = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::all_skipped;
  };
  EXPECT_EQ(code([&] { slic(lab, {.n_target = 17}); }), Errc::invalid_argument);
  EXPECT_EQ(code([&] { slic(lab, {.n_target = 0}); }), Errc::invalid_argument);
  EXPECT_EQ(code([&] { slic(lab, {.n_target = 2, .compactness = 10, .iters = 0}); }),
            Errc::invalid_argument);
  EXPECT_EQ(code([&] { slic(synth::constant_rgb(4, 4, {0, 0, 0}), {.n_target = 2}); }),
            Errc::wrong_colorspace);
}

TEST(Connectivity, MergesOrphanIntoLongestBorder) {
  // 4x4: label 2 is a single pixel touching label 0 on one side and label 1
  // on two sides.
  std::vector<int> labels{0, 0, 1, 1,
                          0, 0, 2, 1,
                          0, 0, 1, 1,
                          0, 0, 1, 1};
  const int k = enforce_connectivity(labels, 4, 4, 2);
  EXPECT_EQ(k, 2);
  EXPECT_EQ(labels[6], labels[7]);
}

TEST(Connectivity, SplitsDisconnectedLabels) {
  std::vector<int> labels{0, 1, 0,
                          0, 1, 0,
                          0, 1, 0};
  EXPECT_EQ(enforce_connectivity(labels, 3, 3, 1), 3);
  EXPECT_NE(labels[0], labels[2]);
}

TEST(Graph, EdgeCounts) {
  const Image one = synth::constant_lab(6, 6, {50, 0, 0});
  EXPECT_TRUE(build_graph(synth::grid_segmentation(one, 1, 1)).edges.empty());
  EXPECT_EQ(build_graph(synth::grid_segmentation(one, 2, 1)).edges.size(), 1u);
  const SuperpixelGraph g = build_graph(synth::grid_segmentation(one, 3, 3));
  EXPECT_EQ(g.edges.size(), 12u);
  for (const auto& e : g.edges) {
    EXPECT_LT(e.a, e.b);
    EXPECT_GE(e.weight, 0.0);
  }
}

TEST(Graph, WeightsAreLabDistances) {
  const Image lab = synth::two_tone_lab(4, 4, {50, 3, 0}, {80, -1, 0});
  const SuperpixelGraph g = build_graph(synth::grid_segmentation(lab, 1, 2));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_DOUBLE_EQ(g.edges[0].weight, 30.0 * std::sqrt(1.0 + 16.0 / 900.0));
  EXPECT_EQ(g.adjacency[0], std::vector<int>{0});
  EXPECT_EQ(g.adjacency[1], std::vector<int>{0});
}

TEST(Graph, RandomSegmentationsAreSymmetricAndComplete) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Segmentation seg = synth::random_segmentation(20, 24, 12, rng);
    const SuperpixelGraph g = build_graph(seg);
    std::set<std::pair<int, int>> expected;
    for (int r = 0; r < seg.height; ++r) {
      for (int c = 0; c < seg.width; ++c) {
        const int a = seg.label(r, c);
        if (c + 1 < seg.width && seg.label(r, c + 1) != a) {
          expected.insert(std::minmax(a, seg.label(r, c + 1)));
        }
        if (r + 1 < seg.height && seg.label(r + 1, c) != a) {
          expected.insert(std::minmax(a, seg.label(r + 1, c)));
        }
      }
    }
    std::set<std::pair<int, int>> got;
    for (const auto& e : g.edges) got.insert({e.a, e.b});
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got.size(), g.edges.size());
  }
}

TEST(Boundary, GridAndSingle) {
  const Image lab = synth::constant_lab(9, 9, {50, 0, 0});
  EXPECT_EQ(boundary_superpixels(synth::grid_segmentation(lab, 1, 1)), std::vector<int>{0});
  EXPECT_EQ(boundary_superpixels(synth::grid_segmentation(lab, 3, 3)),
            (std::vector<int>{0, 1, 2, 3, 5, 6, 7, 8}));
  EXPECT_FALSE(boundary_superpixels(slic(scene_lab(40, 50, 2), {.n_target = 30})).empty());
}

TEST(MakeSegmentation, RejectsBadLabels) {
  const Image lab = synth::constant_lab(2, 2, {50, 0, 0});
  EXPECT_THROW(make_segmentation({0, 1, 2, 5}, 2, 2, 3, lab), Error);
  EXPECT_THROW(make_segmentation({0, 0, 0, 0}, 2, 2, 2, lab), Error);
  EXPECT_THROW(make_segmentation({0, 0, 0}, 2, 2, 1, lab), Error);
}
