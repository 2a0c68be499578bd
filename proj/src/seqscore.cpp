#include "dcgkit/seqscore.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dcgkit/parallel.hpp"

namespace dcgkit::seqscore {

void ScoringParams::validate() const {
  if (!(gap_open >= 0.0) || !std::isfinite(gap_open)) throw InputError("gap opening penalty must be >= 0");
  if (!(gap_extend >= 0.0) || !std::isfinite(gap_extend)) throw InputError("gap extension penalty must be >= 0");
}

AlignmentFormat parse_format(const std::string& name) {
  if (name == "fasta" || name == "aligned-fasta") return AlignmentFormat::fasta;
  if (name == "clustal") return AlignmentFormat::clustal;
  throw InputError(fmt::format("unknown alignment format '{}' (expected fasta or clustal)", name));
}

namespace {

struct Record {
  std::string name;
  std::string seq;
  std::size_t line;  // where the record was first seen
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void append_residues(Record& rec, std::string_view chunk, std::size_t line_no) {
  for (char raw : chunk) {
    if (std::isspace(static_cast<unsigned char>(raw))) continue;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
    if (c != 'A' && c != 'C' && c != 'G' && c != 'T' && c != '-')
      throw InputError(fmt::format("alignment line {}: symbol '{}' in '{}' is not one of A,C,G,T,-", line_no, raw,
                                   rec.name));
    rec.seq += c;
  }
}

std::vector<Record> read_fasta(std::string_view text) {
  std::vector<Record> recs;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (blank(line)) continue;
    if (line.front() == '>') {
      std::string name(line.substr(1));
      const auto stop = name.find_first_of(" \t");
      if (stop != std::string::npos) name.resize(stop);
      if (name.empty()) throw InputError(fmt::format("alignment line {}: empty sequence name", i + 1));
      recs.push_back({name, "", i + 1});
      continue;
    }
    if (recs.empty()) throw InputError(fmt::format("alignment line {}: sequence data before the first '>' header", i + 1));
    append_residues(recs.back(), line, i + 1);
  }
  return recs;
}

std::vector<Record> read_clustal(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size() || lines[i].substr(0, 7) != "CLUSTAL")
    throw InputError(fmt::format("alignment line {}: expected a CLUSTAL header", std::min(i + 1, lines.size())));
  std::vector<Record> recs;
  std::map<std::string, std::size_t> index;
  for (++i; i < lines.size(); ++i) {
    const auto line = lines[i];
    // Blank separators and conservation lines (which start with whitespace).
    if (blank(line) || std::isspace(static_cast<unsigned char>(line.front()))) continue;
    const auto name_end = line.find_first_of(" \t");
    if (name_end == std::string_view::npos)
      throw InputError(fmt::format("alignment line {}: expected '<name> <residues>'", i + 1));
    const std::string name(line.substr(0, name_end));
    auto rest = line.substr(name_end);
    // Optional trailing residue count.
    auto trimmed = rest;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.remove_suffix(1);
    const auto last_ws = trimmed.find_last_of(" \t");
    if (last_ws != std::string_view::npos) {
      const auto tail = trimmed.substr(last_ws + 1);
      if (!tail.empty() && std::all_of(tail.begin(), tail.end(), [](unsigned char c) { return std::isdigit(c); }))
        trimmed = trimmed.substr(0, last_ws);
    }
    auto [it, fresh] = index.try_emplace(name, recs.size());
    if (fresh) recs.push_back({name, "", i + 1});
    append_residues(recs[it->second], trimmed, i + 1);
  }
  return recs;
}

}  // namespace

AlignedSet parse_alignment(std::string_view text, AlignmentFormat format) {
  const auto recs = format == AlignmentFormat::fasta ? read_fasta(text) : read_clustal(text);
  if (recs.size() < 2) throw InputError(fmt::format("alignment has {} sequence(s); at least 2 are required", recs.size()));
  std::set<std::string> seen;
  for (const auto& r : recs) {
    if (format == AlignmentFormat::fasta && !seen.insert(r.name).second)
      throw InputError(fmt::format("alignment line {}: duplicate sequence name '{}'", r.line, r.name));
    if (r.seq.empty()) throw InputError(fmt::format("alignment line {}: sequence '{}' is empty", r.line, r.name));
  }
  for (const auto& r : recs) {
    if (r.seq.size() != recs.front().seq.size())
      throw InputError(fmt::format("alignment line {}: sequence '{}' has length {}, expected {} (from '{}')", r.line,
                                   r.name, r.seq.size(), recs.front().seq.size(), recs.front().name));
  }
  AlignedSet out;
  for (const auto& r : recs) {
    out.names.push_back(r.name);
    out.sequences.push_back(r.seq);
  }
  return out;
}

namespace {

// [first, last) span of residues; an all-gap sequence has an empty span.
std::pair<std::size_t, std::size_t> residue_span(std::string_view s) {
  const auto first = s.find_first_not_of('-');
  if (first == std::string_view::npos) return {0, 0};
  return {first, s.find_last_not_of('-') + 1};
}

}  // namespace

PairScore pair_score_raw(std::string_view s1, std::string_view s2, const ScoringParams& params) {
  params.validate();
  if (s1.size() != s2.size())
    throw InputError(fmt::format("sequences differ in length ({} vs {})", s1.size(), s2.size()));
  const auto [b1, e1] = residue_span(s1);
  const auto [b2, e2] = residue_span(s2);
  const std::size_t lo = std::max(b1, b2), hi = std::min(e1, e2);

  PairScore out;
  int run_owner = 0;  // 0: none, 1: gap in s1, 2: gap in s2
  std::size_t run_len = 0;
  double penalty = 0.0;
  auto close_run = [&] {
    if (run_len) {
      penalty += params.gap_open + params.gap_extend * static_cast<double>(run_len);
      ++out.gap_runs;
      out.gap_positions += run_len;
    }
    run_owner = 0;
    run_len = 0;
  };
  for (std::size_t i = lo; i < hi; ++i) {
    const bool g1 = s1[i] == '-', g2 = s2[i] == '-';
    if (g1 && g2) continue;
    ++out.common_length;
    if (!g1 && !g2) {
      close_run();
      if (s1[i] == s2[i]) ++out.matches;
      continue;
    }
    const int owner = g1 ? 1 : 2;
    if (owner != run_owner) close_run();
    run_owner = owner;
    ++run_len;
  }
  close_run();
  if (out.common_length == 0) throw InputError("sequences share no comparable positions");
  out.raw = static_cast<double>(out.matches) - penalty;
  out.normalized = out.raw / static_cast<double>(out.common_length);
  return out;
}

SimilarityResult similarity_matrix(const AlignedSet& aln, const ScoringParams& params, unsigned threads) {
  params.validate();
  const std::size_t k = aln.size();
  if (k < 3) throw InputError(fmt::format("standardization needs at least 3 sequences (got {})", k));
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) idx.emplace_back(i, j);

  SimilarityResult out;
  out.names = aln.names;
  out.pairs.resize(idx.size());
  parallel_for(idx.size(), threads, [&](unsigned, std::size_t p) {
    const auto [i, j] = idx[p];
    try {
      out.pairs[p] = pair_score_raw(aln.sequences[i], aln.sequences[j], params);
    } catch (const InputError& e) {
      throw InputError(fmt::format("{} vs {}: {}", aln.names[i], aln.names[j], e.what()));
    }
  });

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : out.pairs) {
    lo = std::min(lo, s.normalized);
    hi = std::max(hi, s.normalized);
  }
  if (!(hi > lo))
    throw InputError(fmt::format("cannot standardize: every pair has the same normalized score {}", lo));
  out.similarity.n = k;
  out.similarity.v.assign(k * k, 1.0);
  for (std::size_t p = 0; p < idx.size(); ++p) {
    const auto [i, j] = idx[p];
    const double s = (out.pairs[p].normalized - lo) / (hi - lo);
    out.similarity.v[i * k + j] = out.similarity.v[j * k + i] = s;
  }
  return out;
}

DistanceMatrix to_distance(const SimilarityResult& s) {
  std::vector<double> d(s.similarity.v.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = 1.0 - s.similarity.v[i];
  return DistanceMatrix(s.similarity.n, std::move(d), s.names);
}

}  // namespace dcgkit::seqscore
