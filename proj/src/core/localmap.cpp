#include "fogest/localmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/core.h>

#include "fogest/error.hpp"
#include "fogest/text_util.hpp"

namespace fogest {

double distance(const Vec3& a, const Vec3& b) noexcept {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

LocalMapGraph::LocalMapGraph(int channels) : channels_(channels) {
  require(channels == 1 || channels == 3, "local map must have 1 or 3 intensity channels");
}

void LocalMapGraph::add_frame(FrameId id, std::optional<Vec3> position) {
  if (!frames_.emplace(id, position).second) fail(ErrorCode::Validation, fmt::format("duplicate frame {}", id));
}

void LocalMapGraph::add_landmark(LandmarkId id, std::optional<Vec3> position) {
  if (!landmarks_.emplace(id, position).second) fail(ErrorCode::Validation, fmt::format("duplicate landmark {}", id));
}

void LocalMapGraph::add_edge(const Edge& edge) {
  const auto name = [&] { return fmt::format("edge ({}, {})", edge.frame, edge.landmark); };
  if (!frames_.contains(edge.frame)) fail(ErrorCode::Validation, name() + " references unknown frame");
  if (!landmarks_.contains(edge.landmark)) fail(ErrorCode::Validation, name() + " references unknown landmark");
  if (!(std::isfinite(edge.distance) && edge.distance > 0.0))
    fail(ErrorCode::Validation, fmt::format("{} has invalid distance {}", name(), edge.distance));
  for (int c = 0; c < channels_; ++c) {
    const double i = edge.intensity[c];
    if (!(i >= 0.0 && i <= 255.0))
      fail(ErrorCode::Validation, fmt::format("{} has intensity {} outside [0, 255]", name(), i));
  }
  if (!pairs_.emplace(edge.frame, edge.landmark).second) fail(ErrorCode::Validation, name() + " is duplicated");
  Edge stored = edge;
  for (int c = channels_; c < 3; ++c) stored.intensity[c] = 0.0;
  edges_.push_back(stored);
}

std::vector<Edge> LocalMapGraph::edges_of(LandmarkId landmark) const {
  std::vector<Edge> out;
  for (const auto& e : edges_)
    if (e.landmark == landmark) out.push_back(e);
  return out;
}

std::optional<Vec3> LocalMapGraph::latest_frame_position() const {
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it)
    if (it->second) return it->second;
  return std::nullopt;
}

LocalMapGraph LocalMapGraph::restrict_to_frames(const std::set<FrameId>& frames) const {
  LocalMapGraph sub(channels_);
  for (FrameId f : frames) {
    auto it = frames_.find(f);
    require(it != frames_.end(), fmt::format("frame {} not in graph", f));
    sub.add_frame(f, it->second);
  }
  for (const auto& e : edges_) {
    if (!frames.contains(e.frame)) continue;
    if (!sub.landmarks_.contains(e.landmark)) sub.add_landmark(e.landmark, landmarks_.at(e.landmark));
    sub.add_edge(e);
  }
  return sub;
}

std::size_t ObservationSet::pair_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.pairs.size();
  return n;
}

void validate(const SelectionThresholds& t) {
  require(t.xi_f >= 2, fmt::format("xi_f must be at least 2, got {}", t.xi_f));
  require(t.xi_k >= 1, fmt::format("xi_k must be at least 1, got {}", t.xi_k));
}

double channel_intensity(const LocalMapGraph& graph, const Edge& edge, Channel channel) {
  if (graph.channels() == 1) {
    require(channel == Channel::Gray, fmt::format("channel '{}' requested from a grayscale map", to_string(channel)));
    return edge.intensity[0];
  }
  switch (channel) {
    case Channel::Gray: return to_gray(edge.intensity[0], edge.intensity[1], edge.intensity[2]);
    case Channel::Red: return edge.intensity[0];
    case Channel::Green: return edge.intensity[1];
    case Channel::Blue: return edge.intensity[2];
  }
  return edge.intensity[0];
}

ObservationSet generate_dr_pairs(const LocalMapGraph& graph, const GammaMap& map, Channel channel,
                                 const SelectionThresholds& thresholds) {
  validate(thresholds);
  std::map<LandmarkId, std::vector<const Edge*>> incident;
  for (const auto& e : graph.edges()) incident[e.landmark].push_back(&e);

  ObservationSet obs;
  for (auto& [landmark, edges] : incident) {
    if (static_cast<int>(edges.size()) < thresholds.xi_f) continue;
    std::sort(edges.begin(), edges.end(), [](const Edge* a, const Edge* b) { return a->frame < b->frame; });
    LandmarkObservations group{landmark, {}};
    group.pairs.reserve(edges.size());
    for (const Edge* e : edges)
      group.pairs.push_back({e->frame, e->distance, map.expand(channel_intensity(graph, *e, channel))});
    obs.groups.push_back(std::move(group));
  }
  return obs;
}

ObservationSet generate_dr_pairs(const LocalMapGraph& graph, const ChannelGammaMaps& maps, Channel channel,
                                 const SelectionThresholds& thresholds) {
  return generate_dr_pairs(graph, maps.get(channel), channel, thresholds);
}

bool check_sufficiency(const ObservationSet& obs, const SelectionThresholds& thresholds) {
  validate(thresholds);
  return static_cast<int>(obs.groups.size()) >= thresholds.xi_k;
}

namespace {

std::optional<Vec3> parse_position(const std::vector<std::string>& tok, std::size_t first, const std::string& where) {
  if (tok.size() == first) return std::nullopt;
  if (tok.size() != first + 3) fail(ErrorCode::Parse, where + ": position needs exactly 3 coordinates");
  return Vec3{parse_double(tok[first], where), parse_double(tok[first + 1], where), parse_double(tok[first + 2], where)};
}

void write_position(std::ostream& out, const std::optional<Vec3>& p) {
  if (p) out << ' ' << format_double(p->x) << ' ' << format_double(p->y) << ' ' << format_double(p->z);
}

}  // namespace

LocalMapGraph parse_map(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  std::optional<LocalMapGraph> graph;
  std::int64_t n_frames = 0, n_landmarks = 0, n_edges = 0;

  struct PendingEdge {
    Edge edge;
    int line;
  };
  std::vector<PendingEdge> pending;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto tok = split_whitespace(line);
    if (tok.empty()) continue;
    const std::string where = fmt::format("{}:{}", source, line_no);

    if (!graph) {
      if (tok[0] != "fogmap" || tok.size() != 6)
        fail(ErrorCode::Parse, where + ": expected header 'fogmap 1 <channels> <frames> <landmarks> <edges>'");
      if (parse_int64(tok[1], where) != 1) fail(ErrorCode::Parse, where + ": unsupported map version " + tok[1]);
      const auto channels = parse_int64(tok[2], where);
      if (channels != 1 && channels != 3) fail(ErrorCode::Parse, where + ": channels must be 1 or 3");
      graph.emplace(static_cast<int>(channels));
      n_frames = parse_int64(tok[3], where);
      n_landmarks = parse_int64(tok[4], where);
      n_edges = parse_int64(tok[5], where);
      continue;
    }

    try {
      if (tok[0] == "F") {
        if (tok.size() < 2) fail(ErrorCode::Parse, where + ": frame record needs an id");
        graph->add_frame(parse_int64(tok[1], where), parse_position(tok, 2, where));
      } else if (tok[0] == "K") {
        if (tok.size() < 2) fail(ErrorCode::Parse, where + ": landmark record needs an id");
        graph->add_landmark(parse_int64(tok[1], where), parse_position(tok, 2, where));
      } else if (tok[0] == "E") {
        const std::size_t expect = 4 + static_cast<std::size_t>(graph->channels());
        if (tok.size() != expect)
          fail(ErrorCode::Parse, fmt::format("{}: edge record needs {} fields, got {}", where, expect, tok.size()));
        Edge e;
        e.frame = parse_int64(tok[1], where);
        e.landmark = parse_int64(tok[2], where);
        e.distance = parse_double(tok[3], where);
        for (int c = 0; c < graph->channels(); ++c) e.intensity[c] = parse_double(tok[4 + c], where);
        pending.push_back({e, line_no});
      } else {
        fail(ErrorCode::Parse, fmt::format("{}: unknown record type '{}'", where, tok[0]));
      }
    } catch (const Error& err) {
      if (err.code() == ErrorCode::Validation) fail(ErrorCode::Validation, where + ": " + err.what());
      throw;
    }
  }
  if (!graph) fail(ErrorCode::Parse, source + ": missing 'fogmap' header");

  for (const auto& p : pending) {
    try {
      graph->add_edge(p.edge);
    } catch (const Error& err) {
      fail(err.code(), fmt::format("{}:{}: {}", source, p.line, err.what()));
    }
  }

  const auto check_count = [&](const char* what, std::int64_t declared, std::size_t actual) {
    if (declared != static_cast<std::int64_t>(actual))
      fail(ErrorCode::Validation, fmt::format("{}: header declares {} {} but file has {}", source, declared, what, actual));
  };
  check_count("frames", n_frames, graph->frames().size());
  check_count("landmarks", n_landmarks, graph->landmarks().size());
  check_count("edges", n_edges, graph->edges().size());
  return std::move(*graph);
}

void write_map(const LocalMapGraph& graph, std::ostream& out) {
  out << "fogmap 1 " << graph.channels() << ' ' << graph.frames().size() << ' ' << graph.landmarks().size() << ' '
      << graph.edges().size() << '\n';
  for (const auto& [id, pos] : graph.frames()) {
    out << "F " << id;
    write_position(out, pos);
    out << '\n';
  }
  for (const auto& [id, pos] : graph.landmarks()) {
    out << "K " << id;
    write_position(out, pos);
    out << '\n';
  }
  for (const auto& e : graph.edges()) {
    out << "E " << e.frame << ' ' << e.landmark << ' ' << format_double(e.distance);
    for (int c = 0; c < graph.channels(); ++c) out << ' ' << format_double(e.intensity[c]);
    out << '\n';
  }
}

LocalMapGraph load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open map file '{}'", path.string()));
  return parse_map(in, path.string());
}

void save_map(const LocalMapGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write map file '{}'", path.string()));
  write_map(graph, out);
}

}  // namespace fogest
