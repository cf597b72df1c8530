// A Cross owns one MarkerMatrix holding every marker it knows about. Each
// marker index lives either in exactly one LinkageGroup or in exactly one
// MarkerLedger (markers pulled aside by the diagnostics tooling). Operations
// return new values; a Cross is never mutated in place.
#pragma once

#include "linkmap/error.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linkmap {

enum class Allele : std::uint8_t { AA = 0, BB = 1, AB = 2, Missing = 3 };

/// On-disk symbol: A, B, X (heterozygote) or U (missing).
char allele_symbol(Allele a) noexcept;

/// Accepts A, B, X, U and '-'; anything else throws ParseError.
Allele parse_allele(std::string_view symbol);

inline bool is_observed(Allele a) noexcept { return a != Allele::Missing; }

enum class PopKind { BC, DH, RILn, ARIL };

struct PopulationType {
  PopKind kind = PopKind::DH;
  int selfing_generations = 0;  // RILn only, >= 2

  static PopulationType bc() { return {PopKind::BC, 0}; }
  static PopulationType dh() { return {PopKind::DH, 0}; }
  static PopulationType aril() { return {PopKind::ARIL, 0}; }
  static PopulationType riln(int r);

  /// "BC", "DH", "ARIL", "RIL<r>" (e.g. "RIL2" for an F2).
  static PopulationType parse(std::string_view name);
  std::string name() const;

  bool allows_heterozygotes() const noexcept { return kind == PopKind::RILn; }
  bool is_finite_ril() const noexcept { return kind == PopKind::RILn; }
  bool is_ril() const noexcept { return kind == PopKind::RILn || kind == PopKind::ARIL; }

  /// 2^-(r-1) for RILn, 0 otherwise.
  double expected_het_proportion() const noexcept;

  friend bool operator==(const PopulationType&, const PopulationType&) = default;
};

/// n genotypes x t markers of allele calls, stored marker-major so that a
/// marker column is contiguous.
class MarkerMatrix {
 public:
  MarkerMatrix() = default;
  MarkerMatrix(std::vector<std::string> genotype_names, std::vector<std::string> marker_names,
               std::vector<Allele> calls);

  std::size_t n_genotypes() const noexcept { return genotype_names_.size(); }
  std::size_t n_markers() const noexcept { return marker_names_.size(); }

  Allele at(std::size_t marker, std::size_t genotype) const noexcept {
    return calls_[marker * n_genotypes() + genotype];
  }
  std::span<const Allele> column(std::size_t marker) const noexcept {
    return {calls_.data() + marker * n_genotypes(), n_genotypes()};
  }
  const std::vector<Allele>& calls() const noexcept { return calls_; }

  const std::vector<std::string>& genotype_names() const noexcept { return genotype_names_; }
  const std::vector<std::string>& marker_names() const noexcept { return marker_names_; }
  const std::string& marker_name(std::size_t m) const { return marker_names_[m]; }
  const std::string& genotype_name(std::size_t g) const { return genotype_names_[g]; }

  std::optional<std::size_t> find_marker(std::string_view name) const;
  std::optional<std::size_t> find_genotype(std::string_view name) const;

  std::size_t missing_count(std::size_t marker) const noexcept;

  /// Genotype rows in the given order (duplicates not allowed).
  MarkerMatrix select_genotypes(std::span<const std::size_t> rows) const;

 private:
  std::vector<std::string> genotype_names_;
  std::vector<std::string> marker_names_;
  std::vector<Allele> calls_;
  std::unordered_map<std::string, std::size_t> marker_index_;
  std::unordered_map<std::string, std::size_t> genotype_index_;
};

struct LinkageGroup {
  std::string name;
  std::vector<std::size_t> markers;  // indices into the cross matrix, in map order
  std::vector<double> positions;     // cM, non-decreasing

  double length() const noexcept { return positions.empty() ? 0.0 : positions.back(); }
  std::size_t size() const noexcept { return markers.size(); }
};

enum class LedgerKind { CoLocated, SegDistortion, Missing, Omitted };

/// "co.located", "seg.distortion", "missing", "omitted".
std::string_view ledger_key(LedgerKind kind) noexcept;
LedgerKind parse_ledger_key(std::string_view key);
inline constexpr LedgerKind kAllLedgers[] = {LedgerKind::CoLocated, LedgerKind::SegDistortion,
                                             LedgerKind::Missing, LedgerKind::Omitted};

struct LedgerEntry {
  std::size_t marker = 0;
  double stat = 0.0;                  // missing proportion or -log10 p; NaN when not applicable
  std::optional<std::size_t> anchor;  // co-located entries: the marker this one duplicates
};

struct MarkerLedger {
  std::vector<LedgerEntry> entries;
  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }
};

class Cross {
 public:
  Cross() = default;
  /// Validates the partition invariant: each marker index in exactly one
  /// group or ledger. Throws DataError otherwise.
  Cross(MarkerMatrix matrix, PopulationType pop, std::vector<LinkageGroup> groups,
        std::map<LedgerKind, MarkerLedger> ledgers = {});

  /// One unconstructed group holding every marker in input order.
  static Cross unconstructed(MarkerMatrix matrix, PopulationType pop, std::string group_name = "ALL");

  const MarkerMatrix& matrix() const noexcept { return matrix_; }
  const PopulationType& pop() const noexcept { return pop_; }
  const std::vector<LinkageGroup>& groups() const noexcept { return groups_; }
  const std::map<LedgerKind, MarkerLedger>& ledgers() const noexcept { return ledgers_; }
  const MarkerLedger* ledger(LedgerKind kind) const;

  std::size_t n_genotypes() const noexcept { return matrix_.n_genotypes(); }
  /// Markers placed in linkage groups (ledgers excluded).
  std::size_t n_mapped_markers() const noexcept;
  const LinkageGroup* find_group(std::string_view name) const;
  std::vector<double> group_lengths() const;

 private:
  MarkerMatrix matrix_;
  PopulationType pop_;
  std::vector<LinkageGroup> groups_;
  std::map<LedgerKind, MarkerLedger> ledgers_;
};

/// Semantic equality: same population, genotypes, groups (names, marker names
/// in order, positions within `position_tol`), calls for every marker, and
/// ledgers (marker names, anchors, stats within `position_tol`).
bool equivalent(const Cross& a, const Cross& b, double position_tol = 1e-3);

/// Recounted ledger statistic for a marker (missing proportion or
/// seg-distortion -log10 p); NaN for co-located / omitted ledgers.
double ledger_statistic(const MarkerMatrix& matrix, std::size_t marker, LedgerKind kind,
                        const PopulationType& pop);

// ---- file i/o --------------------------------------------------------------

struct LoadOptions {
  std::string default_group = "ALL";
  bool read_ledgers = true;  // pick up <path>.<ledger-key>.tsv sidecars
};

/// Reads an unconstructed (`marker, g1..gN`), grouped (`marker, group, g1..`)
/// or constructed (`marker, group, position_cM, g1..`) TSV file.
Cross load_cross(const std::filesystem::path& path, const PopulationType& pop,
                 const LoadOptions& options = {});
Cross read_cross(std::istream& in, const PopulationType& pop, const LoadOptions& options = {});

/// Writes the constructed-map TSV and one sidecar per non-empty ledger.
void write_cross(const Cross& cross, const std::filesystem::path& path);
void write_map(const Cross& cross, std::ostream& out);

std::filesystem::path ledger_sidecar_path(const std::filesystem::path& map_path, LedgerKind kind);

// ---- structural operations -------------------------------------------------

/// Restricts matrix, groups and ledgers to the kept genotypes (original order
/// preserved) and recomputes ledger statistics on the survivors.
Cross subset_cross(const Cross& cross, std::span<const std::string> keep_genotypes);
Cross subset_cross(const Cross& cross, const std::function<bool(std::size_t genotype)>& keep);

/// Restricts the map to the named groups; markers of dropped groups leave the cross.
Cross subset_groups(const Cross& cross, std::span<const std::string> keep_groups);

enum class SuffixRule { Numeric, Alpha };

/// "1","2",... or "A","B",...,"Z","AA",...
std::string group_suffix(std::size_t index, SuffixRule rule);

/// Splits each listed group after each listed marker. Fragments are named
/// <group><sep><suffix> and their positions re-zeroed.
Cross break_groups(const Cross& cross,
                   const std::vector<std::pair<std::string, std::vector<std::string>>>& split,
                   SuffixRule suffix = SuffixRule::Numeric, std::string_view sep = ".");

/// Concatenates groups in the listed order; later fragments are offset by the
/// running length plus `gap` cM. The merged group takes the slot of its first
/// listed member.
Cross merge_groups(const Cross& cross,
                   const std::vector<std::pair<std::string, std::vector<std::string>>>& merge,
                   double gap = 5.0);

/// Unions (keep_all) or intersects genotypes; identically named groups are
/// pooled. A marker present in several maps must not carry conflicting
/// non-missing calls on a shared genotype.
Cross combine_maps(std::span<const Cross> maps, bool keep_all = true);

/// Returns a new Cross whose groups are renamed in order.
Cross rename_groups(const Cross& cross, std::span<const std::string> names);

/// Census of where every marker lives; throws DataError on orphan/duplicate.
void check_partition(const Cross& cross);

}  // namespace linkmap
