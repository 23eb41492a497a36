#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/graph.hpp"

namespace pipeforge {

/// Fixed node box and gap sizes in pixels. The engine does not render, so
/// every node gets the same box.
struct LayoutMetrics {
  double node_width = 280;
  double node_height = 160;
  double column_gap = 80;
  double row_gap = 40;
};

inline constexpr LayoutMetrics kDefaultLayout{};

class CycleError : public Error {
public:
  CycleError(std::string source, std::string target)
      : Error("cycle detected: back edge " + source + " -> " + target), source_(std::move(source)),
        target_(std::move(target)) {}
  const std::string& source() const { return source_; }
  const std::string& target() const { return target_; }

private:
  std::string source_;
  std::string target_;
};

/// Column of every node: 0 without incoming edges, else one past the deepest
/// predecessor (longest path from a source). Indexed like graph.nodes.
/// Edges from unknown nodes are ignored. Throws CycleError.
std::vector<std::size_t> layer_columns(const SerializedGraph& graph);

/// Places each node at (column * (W + GX), row * (H + GY)), with rows taken
/// in insertion order inside a column. Only positions change.
SerializedGraph optimize_layout(const SerializedGraph& graph, const LayoutMetrics& metrics = kDefaultLayout);

} // namespace pipeforge
