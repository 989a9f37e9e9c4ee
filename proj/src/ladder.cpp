#include "qcr/ladder.hpp"

#include <algorithm>
#include <stdexcept>

namespace qcr {

char level_char(TransmonLevel level) {
  constexpr char kNames[] = {'g', 'e', 'f', 'h'};
  return kNames[static_cast<int>(level)];
}

TransmonLevel level_from_char(char c) {
  switch (c) {
    case 'g':
      return TransmonLevel::g;
    case 'e':
      return TransmonLevel::e;
    case 'f':
      return TransmonLevel::f;
    case 'h':
      return TransmonLevel::h;
    default:
      throw std::invalid_argument(std::string("unknown transmon level '") + c + "'");
  }
}

std::string LevelKey::name() const { return level_char(transmon) + std::to_string(photons); }

LevelKey parse_level(const std::string& name) {
  if (name.size() < 2) throw std::invalid_argument("bad level name '" + name + "'");
  const TransmonLevel t = level_from_char(name.front());
  std::size_t used = 0;
  int photons = 0;
  try {
    photons = std::stoi(name.substr(1), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad level name '" + name + "'");
  }
  if (used != name.size() - 1 || photons < 0) {
    throw std::invalid_argument("bad level name '" + name + "'");
  }
  return {t, photons};
}

Ladder::Ladder(Truncation truncation, std::vector<DressedLevel> levels,
               std::vector<double> energies)
    : truncation_(truncation), levels_(std::move(levels)), energies_(std::move(energies)) {
  if (levels_.size() != energies_.size()) {
    throw std::invalid_argument("Ladder: level and energy counts differ");
  }
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].index != i) throw std::invalid_argument("Ladder: basis_index out of order");
    if (energies_[i] < 0.0) throw std::invalid_argument("Ladder: negative level energy");
  }
}

std::optional<std::size_t> Ladder::index_of(LevelKey key) const {
  for (const auto& level : levels_) {
    if (level.key == key) return level.index;
  }
  return std::nullopt;
}

std::optional<double> Ladder::transmon_energy(TransmonLevel level) const {
  if (auto idx = index_of(level, 0)) return energies_[*idx];
  return std::nullopt;
}

std::vector<LevelKey> canonical_levels(Truncation truncation) {
  const int max_excitations = truncation == Truncation::four ? 2 : 3;
  std::vector<LevelKey> keys;
  for (int total = 0; total <= max_excitations; ++total) {
    for (int j = std::min(total, kTransmonLevels - 1); j >= 0; --j) {
      keys.push_back({static_cast<TransmonLevel>(j), total - j});
    }
  }
  if (truncation == Truncation::four) {
    // Only f0 survives from the two-excitation shell.
    std::erase_if(keys, [](const LevelKey& k) { return k.excitations() == 2 && k.photons > 0; });
  }
  return keys;
}

Ladder build_ladder(Truncation truncation, const SystemParams& params, QcrState state) {
  const auto& f = params.frequencies[state];
  const double transmon[kTransmonLevels] = {0.0, f.ge, f.ge + f.ef, f.ge + f.ef + f.fh};
  std::vector<DressedLevel> levels;
  std::vector<double> energies;
  for (const LevelKey& key : canonical_levels(truncation)) {
    levels.push_back({key, levels.size()});
    energies.push_back(transmon[static_cast<int>(key.transmon)] + key.photons * f.resonator);
  }
  return Ladder(truncation, std::move(levels), std::move(energies));
}

}  // namespace qcr
