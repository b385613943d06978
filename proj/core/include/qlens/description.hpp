#pragma once

#include <optional>
#include <string>

#include "qlens/feedback.hpp"
#include "qlens/kalman.hpp"
#include "qlens/model.hpp"

// File format for system descriptions: a JSON document with the system
// quintuple at top level and optional sections for a canonical-form
// partition, a partitioned plant, a beamsplitter, optomechanical parameters
// and simulation settings. Complex entries are [re, im] pairs; matrices are
// row-major lists of rows. Declared sizes are cross-checked against every
// matrix rather than inferred.

namespace qlens {

struct KalmanPartitionSpec {
    Eigen::Index n_co, n_isolated, n_paired;
    RealMatrix a, b, c;
};

struct SimSettings {
    double dt = 0.0;
    double horizon = 10.0;
    std::uint64_t seed = 1;
    int ensemble = 1;
};

struct SystemDescription {
    std::string name;
    std::optional<SystemParams> system;
    std::optional<KalmanPartitionSpec> partition;
    std::optional<PartitionedPlant> plant;
    std::optional<BeamsplitterParams> beamsplitter;
    std::optional<OptomechParams> optomech;
    std::optional<SimSettings> sim;
};

// Throws ParseError with position context on malformed input.
SystemDescription parse_description(const std::string& text);
SystemDescription load_description(const std::string& path);

// JSON text; matrices at full precision, byte-stable key order.
std::string write_description(const SystemDescription& d);
void save_description(const SystemDescription& d, const std::string& path);

}  // namespace qlens
