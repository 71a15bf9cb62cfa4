#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fogest/photometry.hpp"

namespace fogest {

using FrameId = std::int64_t;
using LandmarkId = std::int64_t;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b) noexcept;

// One observation of landmark `landmark` from frame `frame`.
struct Edge {
  FrameId frame = 0;
  LandmarkId landmark = 0;
  double distance = 0.0;                  // metres, > 0
  std::array<double, 3> intensity{};      // only the first channels() entries are used
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Bipartite frames/landmarks observation graph. Every mutation validates
// the graph invariants, so a constructed graph is always consistent.
class LocalMapGraph {
 public:
  explicit LocalMapGraph(int channels = 1);

  int channels() const noexcept { return channels_; }

  void add_frame(FrameId id, std::optional<Vec3> position = std::nullopt);
  void add_landmark(LandmarkId id, std::optional<Vec3> position = std::nullopt);
  void add_edge(const Edge& edge);

  const std::map<FrameId, std::optional<Vec3>>& frames() const noexcept { return frames_; }
  const std::map<LandmarkId, std::optional<Vec3>>& landmarks() const noexcept { return landmarks_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(FrameId frame, LandmarkId landmark) const { return pairs_.contains({frame, landmark}); }

  /// Edges incident to a landmark, in insertion order.
  std::vector<Edge> edges_of(LandmarkId landmark) const;

  /// Position of the highest-id frame that carries one.
  std::optional<Vec3> latest_frame_position() const;

  /// Subgraph induced by a set of frames: those frames, their edges and every
  /// landmark they observe.
  LocalMapGraph restrict_to_frames(const std::set<FrameId>& frames) const;

  friend bool operator==(const LocalMapGraph& a, const LocalMapGraph& b) {
    return a.channels_ == b.channels_ && a.frames_ == b.frames_ && a.landmarks_ == b.landmarks_ &&
           a.edges_ == b.edges_;
  }

 private:
  int channels_;
  std::map<FrameId, std::optional<Vec3>> frames_;
  std::map<LandmarkId, std::optional<Vec3>> landmarks_;
  std::vector<Edge> edges_;
  std::set<std::pair<FrameId, LandmarkId>> pairs_;
};

struct DistanceRadiance {
  FrameId frame = 0;
  double distance = 0.0;
  double radiance = 0.0;
};

struct LandmarkObservations {
  LandmarkId landmark = 0;
  std::vector<DistanceRadiance> pairs;  // ordered by frame id
};

// Distance-radiance pairs grouped per landmark, groups ordered by landmark id.
struct ObservationSet {
  std::vector<LandmarkObservations> groups;

  std::size_t pair_count() const noexcept;
  bool empty() const noexcept { return groups.empty(); }
};

struct SelectionThresholds {
  int xi_f = 4;   // minimum frames observing a landmark
  int xi_k = 15;  // minimum qualifying landmarks
};

void validate(const SelectionThresholds& t);

/// Scalar intensity of an edge for the selected channel. Gray on an RGB graph
/// uses the luma weights; a colour channel on a grayscale graph is an error.
double channel_intensity(const LocalMapGraph& graph, const Edge& edge, Channel channel);

/// Distance-radiance pairs for every landmark observed in at least xi_f frames.
ObservationSet generate_dr_pairs(const LocalMapGraph& graph, const GammaMap& map, Channel channel,
                                 const SelectionThresholds& thresholds);
ObservationSet generate_dr_pairs(const LocalMapGraph& graph, const ChannelGammaMaps& maps, Channel channel,
                                 const SelectionThresholds& thresholds);

/// True iff the set holds at least xi_k landmark groups.
bool check_sufficiency(const ObservationSet& obs, const SelectionThresholds& thresholds);

// Line-oriented local-map file; grammar in docs/file_formats.md.
LocalMapGraph load_map(const std::filesystem::path& path);
void save_map(const LocalMapGraph& graph, const std::filesystem::path& path);
LocalMapGraph parse_map(std::istream& in, const std::string& source_name);
void write_map(const LocalMapGraph& graph, std::ostream& out);

}  // namespace fogest
