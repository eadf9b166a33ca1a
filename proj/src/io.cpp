#include "alignrr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "alignrr/errors.hpp"

namespace alignrr {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& field, const char* what) {
    try {
        return std::stod(field);
    } catch (const std::exception&) {
        throw io_error(std::string("cannot parse ") + what + " from '" + field + "'");
    }
}

std::string row_letters(const std::vector<int>& row) {
    std::string out;
    out.reserve(row.size());
    for (int e : row) out.push_back(e == kGap ? '-' : event_letter(e));
    return out;
}

std::vector<int> letters_row(const std::string& letters) {
    std::vector<int> out;
    out.reserve(letters.size());
    for (char c : letters) out.push_back(c == '-' ? kGap : letter_event(c));
    return out;
}

}  // namespace

std::string sequences_to_fasta(const std::vector<EventSequence>& sequences,
                               const std::vector<std::string>& names) {
    std::ostringstream out;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const std::string name = i < names.size() ? names[i] : "seq" + std::to_string(i);
        out << '>' << name << " return=" << format_double(sequences[i].source_return) << '\n';
        out << events_to_string(sequences[i].events) << '\n';
    }
    return out.str();
}

std::vector<EventSequence> fasta_to_sequences(const std::string& text) {
    std::vector<EventSequence> sequences;
    std::istringstream in(text);
    std::string line;
    EventSequence current;
    bool open = false;
    const auto flush = [&] {
        if (open) sequences.push_back(current);
        current = EventSequence{};
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            open = true;
            const auto pos = line.find("return=");
            if (pos != std::string::npos)
                current.source_return = parse_double(line.substr(pos + 7), "return");
        } else {
            if (!open) throw io_error("sequence data before any FASTA header");
            for (char c : line)
                if (c != '-') current.events.push_back(letter_event(c));
        }
    }
    flush();
    return sequences;
}

std::string msa_to_fasta(const Msa& msa) {
    std::ostringstream out;
    for (int r = 0; r < msa.n_rows(); ++r) {
        out << ">row" << r << " return=" << format_double(0.0) << '\n';
        out << row_letters(msa.rows[r]) << '\n';
    }
    return out.str();
}

Msa fasta_to_msa(const std::string& text) {
    Msa msa;
    std::istringstream in(text);
    std::string line;
    std::string pending;
    bool open = false;
    const auto flush = [&] {
        if (open) msa.rows.push_back(letters_row(pending));
        pending.clear();
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            open = true;
        } else {
            if (!open) throw io_error("alignment data before any FASTA header");
            pending += line;
        }
    }
    flush();
    for (const auto& row : msa.rows)
        if (row.size() != msa.rows[0].size()) throw io_error("MSA rows have unequal lengths");
    return msa;
}

std::string scoring_to_csv(const ScoringMatrix& scoring) {
    const int n = scoring.size();
    std::ostringstream out;
    out << "event";
    for (int j = 0; j < n; ++j) out << ',' << event_letter(j);
    out << '\n';
    for (int i = 0; i < n; ++i) {
        out << event_letter(i);
        for (int j = 0; j < n; ++j) out << ',' << format_double(scoring.s(i, j));
        out << '\n';
    }
    out << "p";
    for (int i = 0; i < n; ++i) out << ',' << format_double(scoring.background(i));
    out << '\n';
    out << "gap_open," << format_double(scoring.gap_open) << '\n';
    out << "gap_extend," << format_double(scoring.gap_extend) << '\n';
    return out.str();
}

ScoringMatrix csv_to_scoring(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw io_error("scoring CSV is empty");
    const int n = static_cast<int>(split(trim(line), ',').size()) - 1;
    if (n < 1) throw io_error("scoring CSV header has no events");

    ScoringMatrix scoring;
    scoring.s.resize(n, n);
    scoring.background.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw io_error("scoring CSV truncated");
        const auto fields = split(trim(line), ',');
        if (static_cast<int>(fields.size()) != n + 1) throw io_error("scoring CSV row malformed");
        for (int j = 0; j < n; ++j) scoring.s(i, j) = parse_double(fields[j + 1], "score");
    }
    while (std::getline(in, line)) {
        const auto fields = split(trim(line), ',');
        if (fields.empty() || fields[0].empty()) continue;
        if (fields[0] == "p") {
            for (int i = 0; i < n; ++i)
                scoring.background(i) = parse_double(fields[i + 1], "background");
        } else if (fields[0] == "gap_open") {
            scoring.gap_open = parse_double(fields[1], "gap_open");
        } else if (fields[0] == "gap_extend") {
            scoring.gap_extend = parse_double(fields[1], "gap_extend");
        }
    }
    return scoring;
}

std::string pssm_to_csv(const Pssm& pssm) {
    std::ostringstream out;
    out << "event";
    for (int t = 0; t < pssm.length(); ++t) out << ",c" << t;
    out << '\n';
    for (int i = 0; i < pssm.alphabet(); ++i) {
        out << event_letter(i);
        for (int t = 0; t < pssm.length(); ++t) out << ',' << format_double(pssm.s(i, t));
        out << '\n';
    }
    out << "lambda";
    for (int t = 0; t < pssm.length(); ++t) out << ',' << format_double(pssm.lambda(t));
    out << '\n';
    out << "gap_penalty";
    for (int t = 0; t < pssm.length(); ++t) out << ',' << format_double(pssm.gap_penalty(t));
    out << '\n';
    out << "insertion_penalty," << format_double(pssm.insertion_penalty) << '\n';
    out << "consensus,";
    for (int c : pssm.consensus) out << event_letter(c);
    out << '\n';
    return out.str();
}

Pssm csv_to_pssm(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw io_error("PSSM CSV is empty");
    const int L = static_cast<int>(split(trim(line), ',').size()) - 1;
    if (L < 1) throw io_error("PSSM CSV header has no columns");

    std::vector<std::vector<double>> rows;
    Pssm pssm;
    pssm.lambda = Vector::Ones(L);
    pssm.gap_penalty = Vector::Zero(L);
    while (std::getline(in, line)) {
        const auto fields = split(trim(line), ',');
        if (fields.empty() || fields[0].empty()) continue;
        if (fields[0] == "lambda") {
            for (int t = 0; t < L; ++t) pssm.lambda(t) = parse_double(fields[t + 1], "lambda");
        } else if (fields[0] == "gap_penalty") {
            for (int t = 0; t < L; ++t)
                pssm.gap_penalty(t) = parse_double(fields[t + 1], "gap penalty");
        } else if (fields[0] == "insertion_penalty") {
            pssm.insertion_penalty = parse_double(fields[1], "insertion penalty");
        } else if (fields[0] == "consensus") {
            pssm.consensus = string_to_events(fields[1]);
        } else {
            std::vector<double> row(L);
            for (int t = 0; t < L; ++t) row[t] = parse_double(fields[t + 1], "score");
            rows.push_back(std::move(row));
        }
    }
    pssm.s.resize(static_cast<int>(rows.size()), L);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int t = 0; t < L; ++t) pssm.s(static_cast<int>(i), t) = rows[i][t];
    return pssm;
}

std::string clusters_to_csv(const ClusterAssignment& assignment) {
    std::ostringstream out;
    out << "state_id,cluster,letter\n";
    for (std::size_t s = 0; s < assignment.labels.size(); ++s)
        out << s << ',' << assignment.labels[s] << ',' << event_letter(assignment.labels[s])
            << '\n';
    return out.str();
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    out << "t,state,action,reward\n";
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t)
        out << t << ',' << trajectory.steps[t].state << ',' << trajectory.steps[t].action << ','
            << format_double(trajectory.steps[t].reward) << '\n';
    return out.str();
}

std::string redistributed_to_csv(const EventSequence& seq, const Vector& prefix_scores,
                                 const RedistributedEpisode& episode) {
    std::ostringstream out;
    out << "t,event_letter,S_prefix,R\n";
    for (int t = 0; t < seq.length(); ++t)
        out << t << ',' << event_letter(seq.events[t]) << ','
            << format_double(prefix_scores(t)) << ',' << format_double(episode.rewards(t))
            << '\n';
    out << "correction,,," << format_double(episode.correction) << '\n';
    return out.str();
}

std::string curve_to_csv(const std::vector<std::pair<int, double>>& points) {
    std::ostringstream out;
    out << "episode,eval_return\n";
    for (const auto& [episode, value] : points)
        out << episode << ',' << format_double(value) << '\n';
    return out.str();
}

std::string qtable_to_csv(const QTable& table) {
    std::ostringstream out;
    out << "state";
    for (int a = 0; a < table.q.cols(); ++a) out << ",q" << a;
    for (int a = 0; a < table.q.cols(); ++a) out << ",visits" << a;
    out << '\n';
    for (int s = 0; s < table.q.rows(); ++s) {
        out << s;
        for (int a = 0; a < table.q.cols(); ++a) out << ',' << format_double(table.q(s, a));
        for (int a = 0; a < table.q.cols(); ++a) out << ',' << table.visits(s, a);
        out << '\n';
    }
    return out.str();
}

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) out[key] = value;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace alignrr
