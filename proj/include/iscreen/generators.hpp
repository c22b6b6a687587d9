#pragma once

#include <cstdint>
#include <string>

#include "iscreen/model.hpp"

namespace iscreen {

enum class Topology { er, regular, ring, grid };

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

struct GeneratorOptions {
  int p = 0;
  Topology topology = Topology::ring;
  int degree = 2;           // regular graphs
  double er_prob = -1.0;    // er; default 2/p
  double alpha = 0.1;       // minimum coupling magnitude
  double beta = -1.0;       // maximum coupling magnitude; default alpha
  double field_range = -1.0;  // fields uniform on [-h,h]; default: width slack
                              // gamma - maxdeg*beta when gamma is set, else 0
  double gamma = -1.0;      // rescale so l1_width == gamma; <=0 disables
  std::uint64_t seed = 0;
};

// Random model on the requested topology: coupling magnitudes uniform on
// [alpha, beta] with random signs, fields uniform on [-h, h], then the whole
// parameter vector rescaled so l1_width equals gamma exactly (when set).
// Throws InfeasibleError when alpha/gamma/topology cannot coexist (e.g. the
// rescale would push a coupling magnitude below alpha).
IsingModel generate_model(const GeneratorOptions& opt);

}  // namespace iscreen
