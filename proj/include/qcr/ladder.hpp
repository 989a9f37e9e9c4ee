#pragma once
// Truncated dressed-state ladder |j, n> of the transmon--resonator system.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcr/params.hpp"

namespace qcr {

enum class TransmonLevel : int { g = 0, e = 1, f = 2, h = 3 };

inline constexpr int kTransmonLevels = 4;

char level_char(TransmonLevel level);
TransmonLevel level_from_char(char c);

enum class Truncation { four, ten };

struct LevelKey {
  TransmonLevel transmon = TransmonLevel::g;
  int photons = 0;

  auto operator<=>(const LevelKey&) const = default;

  int excitations() const { return static_cast<int>(transmon) + photons; }
  std::string name() const;  // "g0", "f1", ...
};

// Parses "g0", "e2", ...; throws std::invalid_argument otherwise.
LevelKey parse_level(const std::string& name);

struct DressedLevel {
  LevelKey key;
  std::size_t index = 0;
};

class Ladder {
 public:
  Ladder(Truncation truncation, std::vector<DressedLevel> levels, std::vector<double> energies);

  Truncation truncation() const { return truncation_; }
  std::size_t dim() const { return levels_.size(); }
  std::span<const DressedLevel> levels() const { return levels_; }
  std::span<const double> energies() const { return energies_; }
  double energy(std::size_t index) const { return energies_.at(index); }
  const DressedLevel& level(std::size_t index) const { return levels_.at(index); }

  std::optional<std::size_t> index_of(LevelKey key) const;
  std::optional<std::size_t> index_of(TransmonLevel transmon, int photons) const {
    return index_of(LevelKey{transmon, photons});
  }
  bool contains(LevelKey key) const { return index_of(key).has_value(); }

  // Energy of |j, 0>; nullopt when the level is outside the truncation.
  std::optional<double> transmon_energy(TransmonLevel level) const;

 private:
  Truncation truncation_;
  std::vector<DressedLevel> levels_;
  std::vector<double> energies_;
};

// Canonical ordering: by total excitations, then by transmon label with
// descending photon number: g0; e0 g1; f0 e1 g2; h0 f1 e2 g3.
std::vector<LevelKey> canonical_levels(Truncation truncation);

// Energies are additive, E(j, n) = E_j + n * omega_r with E_g = 0.
Ladder build_ladder(Truncation truncation, const SystemParams& params,
                    QcrState state = QcrState::off);

}  // namespace qcr
