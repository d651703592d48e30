#include "resp/synth.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "rng.hpp"

namespace resp {

double synth_tone_hz(Disease d) {
  switch (d) {
    case Disease::Bronchiectasis: return 70.0;
    case Disease::Bronchiolitis: return 140.0;
    case Disease::COPD: return 280.0;
    case Disease::Healthy: return 560.0;
    case Disease::Pneumonia: return 1110.0;
    case Disease::URTI: return 2200.0;
    case Disease::Asthma: return 200.0;
    case Disease::LRTI: return 790.0;
  }
  return 0.0;
}

namespace {

constexpr std::array<const char*, 7> kLocations = {"Al", "Ar", "Pl", "Pr", "Tc", "Ll", "Lr"};
constexpr std::array<const char*, 4> kEquipment = {"Meditron", "LittC2SE", "AKGC417L", "Litt3200"};

double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - detail::uniform01(rng);
  const double u2 = detail::uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

SynthRecording make_recording(Disease disease, int patient_id, int slot,
                              const RunConfig::Synth& opts, std::uint64_t seed) {
  std::mt19937_64 rng(detail::derive_seed(seed, static_cast<std::uint64_t>(patient_id)));
  SynthRecording rec;
  rec.disease = disease;
  rec.fs = opts.fs;
  rec.meta.patient_id = patient_id;
  rec.meta.recording_index = "1b1";
  rec.meta.chest_location = kLocations[slot % kLocations.size()];
  rec.meta.acquisition_mode = "sc";
  rec.meta.equipment = kEquipment[slot % kEquipment.size()];

  double t = 0.5;
  for (int c = 0; c < opts.cycles_per_recording; ++c) {
    const double d = 3.2 + 4.3 * detail::uniform01(rng);
    rec.cycles.push_back({t, t + d, detail::uniform01(rng) < 0.3, detail::uniform01(rng) < 0.2});
    t += d + 0.3;
  }
  for (int c = 0; c < opts.short_cycles; ++c) {
    const double d = 1.0 + 1.5 * detail::uniform01(rng);
    rec.cycles.push_back({t, t + d, false, false});
    t += d + 0.3;
  }
  const double duration = t + 0.2;

  const double tone = synth_tone_hz(disease) * (1.0 + 0.08 * (detail::uniform01(rng) - 0.5));
  const double phase0 = 2.0 * std::numbers::pi * detail::uniform01(rng);
  const double noise = 0.02 + 0.02 * detail::uniform01(rng);
  const auto n = static_cast<std::size_t>(std::llround(duration * opts.fs));
  rec.samples.assign(n, 0.0);
  std::size_t cycle = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = double(i) / opts.fs;
    while (cycle + 1 < rec.cycles.size() && ti >= rec.cycles[cycle].end_s) ++cycle;
    const auto& cy = rec.cycles[cycle];
    double v = noise * gaussian(rng);
    if (ti >= cy.start_s && ti < cy.end_s) {
      const double tau = ti - cy.start_s;
      const double env = 0.25 + 0.75 * std::pow(std::sin(std::numbers::pi * tau / cy.duration()), 2);
      // Chirp sweeps tone -> 1.5 tone over the cycle.
      const double k = 0.5 * tone / cy.duration();
      const double chirp = std::sin(2.0 * std::numbers::pi * (tone * tau + 0.5 * k * tau * tau));
      v += env * (0.6 * std::sin(2.0 * std::numbers::pi * tone * ti + phase0) + 0.2 * chirp);
    }
    rec.samples[i] = v;
  }
  return rec;
}

}  // namespace

std::vector<SynthRecording> synthesize(const RunConfig::Synth& opts, std::uint64_t seed) {
  std::vector<Disease> classes(kRetainedDiseases.begin(), kRetainedDiseases.end());
  if (opts.include_excluded) {
    classes.push_back(Disease::Asthma);
    classes.push_back(Disease::LRTI);
  }
  std::vector<SynthRecording> out;
  int patient = 101;
  for (const Disease d : classes) {
    for (int p = 0; p < opts.patients_per_class; ++p) {
      out.push_back(make_recording(d, patient++, p, opts, seed));
    }
  }
  return out;
}

}  // namespace resp
