#ifndef PTAWCET_REPORT_HPP
#define PTAWCET_REPORT_HPP

#include <string>

#include "ptawcet/engine.hpp"
#include "ptawcet/model.hpp"

namespace ptawcet {

// JSON form of one report.  Key order is fixed and wall time is omitted, so
// the same analysis always serializes to the same bytes.
std::string report_json(const Report& rep, const Pta& pta);

// Side-by-side JSON of an accelerated and a baseline run of the same model
// and delta.  rg_formula_check recomputes the reduction from the recorded
// cycles as (n - k) * m; it must equal the observed state-count difference.
std::string compare_json(const Report& accelerated, const Report& baseline, const Pta& pta);

// Human-readable summary, including wall time and the residual mass each
// truncated cycle left uncounted.
std::string report_text(const Report& rep, const Pta& pta);

// Graphviz view of the explored graph.  States are merged by location, zone
// and iteration count with their masses summed; cycle edges are bold, with
// the entry edge annotated from its record; restart edges are dashed.
std::string report_dot(const Report& rep, const Pta& pta);

}  // namespace ptawcet

#endif
