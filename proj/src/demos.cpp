#include "entimg/errors.hpp"
#include "entimg/scenario.hpp"

// All demos use micrometres for lengths: grid of 256 points at 5 um, 500 nm light.
// Free-space hops are at least n dx^2 / lambda = 12.8 mm.

namespace entimg::scenario {

namespace {

constexpr const char* kGhostImaging = R"json({
  "schema_version": 1,
  "name": "ghost-imaging",
  "description": "Double slit 15 mm from the crystal in arm 1, read by a bucket. Arm 2 images the unfolded object plane through a single lens (30 mm + 30 mm, f = 15 mm).",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "sources": [
    {"label": "entangled", "kind": "entangled_delta", "amplitude": {"kind": "gaussian", "waist": 250}},
    {"label": "correlated", "kind": "correlated", "amplitude": {"kind": "gaussian", "waist": 250}}
  ],
  "arms": {
    "object": [
      {"type": "free_space", "distance": 15000},
      {"type": "mask", "transmittance": {"kind": "double_slit", "width": 60, "separation": 200}}
    ],
    "imaging": [
      {"type": "free_space", "distance": 15000},
      {"type": "thin_lens", "focal_length": 15000},
      {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 250}},
      {"type": "free_space", "distance": 30000}
    ]
  },
  "measurements": [
    {"kind": "marginal_2", "name": "ghost_image", "arm1": "object", "arm2": "imaging"},
    {"kind": "singles_2", "name": "singles", "arm2": "imaging"},
    {"kind": "joint", "name": "joint", "arm1": "object", "arm2": "imaging"},
    {"kind": "metrics", "name": "image", "of": "ghost_image", "region": [100, 156]}
  ],
  "outputs": {"directory": "ghost-imaging"}
})json";

constexpr const char* kGhostDiffraction = R"json({
  "schema_version": 1,
  "name": "ghost-diffraction",
  "description": "Double slit, Fourier lens and pinhole bucket in arm 1; Fourier lens in arm 2. Entangled pairs show the two-slit fringes, classically correlated pairs do not.",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "sources": [
    {"label": "entangled", "kind": "entangled_delta", "amplitude": {"kind": "gaussian", "waist": 200}},
    {"label": "correlated", "kind": "correlated", "amplitude": {"kind": "gaussian", "waist": 200}}
  ],
  "arms": {
    "bucket": [
      {"type": "mask", "transmittance": {"kind": "double_slit", "width": 20, "separation": 80}},
      {"type": "fourier", "focal_length": 12800},
      {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 5}}
    ],
    "far_field": [
      {"type": "fourier", "focal_length": 12800}
    ]
  },
  "measurements": [
    {"kind": "marginal_2", "name": "pattern", "arm1": "bucket", "arm2": "far_field"},
    {"kind": "singles_2", "name": "singles", "arm2": "far_field"},
    {"kind": "joint", "name": "joint", "arm1": "bucket", "arm2": "far_field"},
    {"kind": "metrics", "name": "fringes", "of": "pattern", "region": [104, 152]},
    {"kind": "sample", "name": "events", "arm1": "bucket", "arm2": "far_field", "n": 1000000, "seed": 20240611}
  ],
  "outputs": {"directory": "ghost-diffraction"}
})json";

constexpr const char* kFactorizableNull = R"json({
  "schema_version": 1,
  "name": "factorizable-null",
  "description": "Product-state pairs: the bucket-gated marginal on each arm equals that arm's singles rate.",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "source": {
    "label": "product",
    "kind": "factorizable",
    "amplitude1": {"kind": "gaussian", "waist": 150, "center": 50},
    "amplitude2": {"kind": "gaussian", "waist": 100, "center": -30}
  },
  "arm1": [
    {"type": "free_space", "distance": 15000},
    {"type": "mask", "transmittance": {"kind": "step_edge", "x0": -20}}
  ],
  "arm2": [
    {"type": "free_space", "distance": 20000},
    {"type": "thin_lens", "focal_length": 12000},
    {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 200}}
  ],
  "measurements": [
    {"kind": "singles_1", "name": "singles_1"},
    {"kind": "singles_2", "name": "singles_2"},
    {"kind": "marginal_1", "name": "marginal_1"},
    {"kind": "marginal_2", "name": "marginal_2"},
    {"kind": "joint", "name": "joint"}
  ],
  "outputs": {"directory": "factorizable-null"}
})json";

constexpr const char* kIsoplanaticCorrelated = R"json({
  "schema_version": 1,
  "name": "isoplanatic-correlated",
  "description": "Correlated pairs with a shift-invariant (circulant) bucket arm: the marginal reduces to the singles rate. Entangled pairs are shown for contrast.",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "sources": [
    {"label": "correlated", "kind": "correlated", "amplitude": {"kind": "gaussian", "waist": 200, "center": 40}},
    {"label": "entangled", "kind": "entangled_delta", "amplitude": {"kind": "gaussian", "waist": 200, "center": 40}}
  ],
  "arms": {
    "blur": [
      {"type": "custom", "circulant": {"kind": "gaussian", "waist": 30}}
    ],
    "observed": [
      {"type": "free_space", "distance": 15000},
      {"type": "mask", "transmittance": {"kind": "double_slit", "width": 40, "separation": 120}}
    ]
  },
  "measurements": [
    {"kind": "marginal_2", "name": "marginal", "arm1": "blur", "arm2": "observed"},
    {"kind": "singles_2", "name": "singles", "arm2": "observed"}
  ],
  "outputs": {"directory": "isoplanatic-correlated"}
})json";

constexpr const char* kSpdcSweep = R"json({
  "schema_version": 1,
  "name": "spdc-sweep",
  "description": "Phase-matching width sweep. Broad pump: SPDC marginals approach the delta-correlated limit as b shrinks. Narrow pump: the Schmidt number falls toward 1 once b exceeds the pump width.",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "sources": [
    {"label": "delta", "kind": "entangled_delta", "amplitude": {"kind": "gaussian", "waist": 200}},
    {"label": "b10", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 200}, "pm_width": 10},
    {"label": "b5", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 200}, "pm_width": 5},
    {"label": "b2_5", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 200}, "pm_width": 2.5},
    {"label": "b1_25", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 200}, "pm_width": 1.25},
    {"label": "b0_625", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 200}, "pm_width": 0.625},
    {"label": "narrow_b10", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 20}, "pm_width": 10},
    {"label": "narrow_b20", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 20}, "pm_width": 20},
    {"label": "narrow_b40", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 20}, "pm_width": 40},
    {"label": "narrow_b80", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 20}, "pm_width": 80},
    {"label": "narrow_b160", "kind": "spdc", "pump": {"kind": "gaussian", "waist": 20}, "pm_width": 160}
  ],
  "arms": {
    "bucket": [
      {"type": "mask", "transmittance": {"kind": "double_slit", "width": 20, "separation": 80}},
      {"type": "fourier", "focal_length": 12800},
      {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 5}}
    ],
    "far_field": [
      {"type": "fourier", "focal_length": 12800}
    ]
  },
  "measurements": [
    {"kind": "marginal_2", "name": "pattern", "arm1": "bucket", "arm2": "far_field",
     "sources": ["delta", "b10", "b5", "b2_5", "b1_25", "b0_625"]},
    {"kind": "schmidt", "name": "schmidt"}
  ],
  "outputs": {"directory": "spdc-sweep"}
})json";

constexpr const char* kRefocus = R"json({
  "schema_version": 1,
  "name": "refocus",
  "description": "Dark-field arm 1 holding one scatterer at the crystal plane (A) and one 15 mm downstream (B), read by a bucket. Each arm-2 system images one scatterer plane; only entangled pairs refocus plane B.",
  "grid": {"n": 256, "dx": 5, "center": 0},
  "wavelength": 0.5,
  "sources": [
    {"label": "entangled", "kind": "entangled_delta", "amplitude": {"kind": "gaussian", "waist": 200}},
    {"label": "correlated", "kind": "correlated", "amplitude": {"kind": "gaussian", "waist": 200}}
  ],
  "arms": {
    "scatter": [],
    "focus_near": [
      {"type": "free_space", "distance": 30000},
      {"type": "thin_lens", "focal_length": 15000},
      {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 187.5}},
      {"type": "free_space", "distance": 30000}
    ],
    "focus_far": [
      {"type": "free_space", "distance": 15000},
      {"type": "thin_lens", "focal_length": 15000},
      {"type": "mask", "transmittance": {"kind": "gaussian_aperture", "waist": 187.5}},
      {"type": "free_space", "distance": 30000}
    ]
  },
  "scatterers": [
    {
      "arm": "scatter",
      "dark_field": true,
      "planes": [
        {"before": [], "after": [{"type": "free_space", "distance": 15000}], "points": [{"x": -152.5, "strength": 1}]},
        {"before": [{"type": "free_space", "distance": 15000}], "after": [], "points": [{"x": 152.5, "strength": 1}]}
      ]
    }
  ],
  "measurements": [
    {"kind": "marginal_2", "name": "image_near", "arm1": "scatter", "arm2": "focus_near"},
    {"kind": "marginal_2", "name": "image_far", "arm1": "scatter", "arm2": "focus_far"},
    {"kind": "metrics", "name": "scatterer_a", "of": "image_near", "region": [138, 178]},
    {"kind": "metrics", "name": "scatterer_b", "of": "image_far", "region": [77, 117]}
  ],
  "outputs": {"directory": "refocus"}
})json";

} // namespace

std::vector<NamedScenario> demo_catalog()
{
    return {
        {"ghost-imaging", kGhostImaging},
        {"ghost-diffraction", kGhostDiffraction},
        {"factorizable-null", kFactorizableNull},
        {"isoplanatic-correlated", kIsoplanaticCorrelated},
        {"spdc-sweep", kSpdcSweep},
        {"refocus", kRefocus},
    };
}

Scenario demo(std::string_view name)
{
    for (const auto& d : demo_catalog()) {
        if (d.name == name) return parse_scenario(d.document);
    }
    throw ValidationError("demo", "unknown demo '" + std::string(name) + "'");
}

} // namespace entimg::scenario
