#pragma once

#include <map>
#include <string>
#include <vector>

#include "alignrr/alignment.hpp"
#include "alignrr/events.hpp"
#include "alignrr/profile.hpp"
#include "alignrr/learning.hpp"
#include "alignrr/redistribution.hpp"
#include "alignrr/types.hpp"

namespace alignrr {

// FASTA-like event sequences: ">name return=<float>" then the letter string
// (gaps as '-'). Shared by raw sequences and MSA rows.
std::string sequences_to_fasta(const std::vector<EventSequence>& sequences,
                               const std::vector<std::string>& names = {});
std::vector<EventSequence> fasta_to_sequences(const std::string& text);

std::string msa_to_fasta(const Msa& msa);
Msa fasta_to_msa(const std::string& text);

// CSV with a header row of event letters; numbers at full double precision.
std::string scoring_to_csv(const ScoringMatrix& scoring);
ScoringMatrix csv_to_scoring(const std::string& text);

// Rows = events, columns = positions, plus lambda / gap / consensus lines.
std::string pssm_to_csv(const Pssm& pssm);
Pssm csv_to_pssm(const std::string& text);

std::string clusters_to_csv(const ClusterAssignment& assignment);

std::string trajectory_to_csv(const Trajectory& trajectory);

std::string redistributed_to_csv(const EventSequence& seq, const Vector& prefix_scores,
                                 const RedistributedEpisode& episode);

std::string curve_to_csv(const std::vector<std::pair<int, double>>& points);

// One row per state: state, per-action values, per-action visit counts.
std::string qtable_to_csv(const QTable& table);

// Declarative key = value configuration; '#' starts a comment.
std::map<std::string, std::string> parse_config(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::string format_double(double value);

}  // namespace alignrr
