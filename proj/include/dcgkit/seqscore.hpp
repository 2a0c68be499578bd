#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dcgkit/dcg.hpp"

namespace dcgkit::seqscore {

// Gap run of length L costs gap_open + gap_extend * L.
struct ScoringParams {
  double gap_open = 15.0;
  double gap_extend = 0.2;
  void validate() const;
};

// Equal-length sequences over {A,C,G,T,-}, upper-cased, unique names.
struct AlignedSet {
  std::vector<std::string> names;
  std::vector<std::string> sequences;
  std::size_t size() const { return names.size(); }
  std::size_t length() const { return sequences.empty() ? 0 : sequences.front().size(); }
};

enum class AlignmentFormat { fasta, clustal };
AlignmentFormat parse_format(const std::string& name);

AlignedSet parse_alignment(std::string_view text, AlignmentFormat format);

struct PairScore {
  double raw = 0.0;
  std::size_t common_length = 0;
  double normalized = 0.0;
  std::size_t matches = 0;
  std::size_t gap_runs = 0;
  std::size_t gap_positions = 0;
};

// Columns where both sequences have a gap are skipped, and so are columns
// inside either sequence's leading or trailing gap run. Every remaining
// maximal run of gaps in one sequence is penalised; matches add 1.
PairScore pair_score_raw(std::string_view s1, std::string_view s2, const ScoringParams& params = {});

struct SimilarityResult {
  std::vector<std::string> names;
  dcg::SquareGrid similarity;          // standardized, unit diagonal
  std::vector<PairScore> pairs;        // upper triangle, row-major (i < j)
};

// Min-max standardization of the normalized pair scores over all i < j.
SimilarityResult similarity_matrix(const AlignedSet& aln, const ScoringParams& params = {}, unsigned threads = 0);

// 1 - S, the distance fed to the dcg command.
DistanceMatrix to_distance(const SimilarityResult& s);

}  // namespace dcgkit::seqscore
