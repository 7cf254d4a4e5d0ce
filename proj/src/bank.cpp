// SPDX-License-Identifier: MIT

#include "resr/bank.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace resr {

namespace {

const std::vector<double>& probe_grid()
{
    static const std::vector<double> grid = [] {
        std::vector<double> t(100);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.1 + 9.9 * static_cast<double>(i) / 99.0;
        return t;
    }();
    return grid;
}

std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view strip(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

std::string_view source_name(BankSource s) noexcept
{
    switch (s) {
    case BankSource::Feynman: return "feynman";
    case BankSource::Nguyen: return "nguyen";
    case BankSource::Augmented: return "augmented";
    }
    return "unknown";
}

BankSource source_from_name(std::string_view name)
{
    for (auto s : {BankSource::Feynman, BankSource::Nguyen, BankSource::Augmented}) {
        if (source_name(s) == name) return s;
    }
    throw std::invalid_argument("unknown bank source '" + std::string(name) + "'");
}

const EquationBankEntry* EquationBank::find(std::string_view id) const
{
    for (const auto& e : entries) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

bool passes_finiteness(const Expr& e)
{
    const auto& grid = probe_grid();
    std::vector<double> out(grid.size());
    Evaluator ev;
    ev.evaluate(e, grid, true, out);
    std::size_t finite = 0;
    for (double v : out) finite += std::isfinite(v) ? 1 : 0;
    return static_cast<double>(finite) >= kBankFiniteFraction * static_cast<double>(grid.size());
}

EquationBank read_bank(std::istream& in, const std::string& origin)
{
    EquationBank bank;
    std::set<std::string, std::less<>> ids;
    std::string line;
    std::size_t lineno = 0;
    auto warn = [&](const std::string& msg) {
        bank.warnings.push_back(origin + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view view = strip(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            constexpr std::string_view tag = "# VERSION";
            if (view.starts_with(tag)) bank.version = std::string(strip(view.substr(tag.size())));
            continue;
        }
        const auto fields = split_tabs(view);
        if (fields.size() < 3 || fields.size() > 4) {
            warn("expected 3 or 4 tab-separated fields, got " + std::to_string(fields.size()));
            continue;
        }
        EquationBankEntry entry;
        entry.id = std::string(strip(fields[0]));
        if (entry.id.empty()) {
            warn("empty id");
            continue;
        }
        try {
            entry.source = source_from_name(strip(fields[1]));
        } catch (const std::invalid_argument& e) {
            warn(e.what());
            continue;
        }
        try {
            entry.expr = parse(fields[2]);
        } catch (const ParseError& e) {
            warn("entry " + entry.id + ": " + e.what());
            continue;
        }
        if (!passes_finiteness(entry.expr)) {
            warn("entry " + entry.id + " is non-finite on more than 10% of the probe grid");
            continue;
        }
        if (fields.size() == 4) entry.notes = std::string(strip(fields[3]));
        if (!ids.insert(entry.id).second) {
            throw BankError(origin + ":" + std::to_string(lineno) + ": duplicate id '" + entry.id + "'");
        }
        bank.entries.push_back(std::move(entry));
    }
    if (bank.entries.empty()) {
        throw BankError(origin + ": zero valid entries");
    }
    return bank;
}

EquationBank load_bank(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in.good()) throw BankError("cannot read bank file " + path.string());
    return read_bank(in, path.string());
}

void save_bank(const std::filesystem::path& path, const EquationBank& bank)
{
    std::ofstream out(path);
    if (!out.good()) throw BankError("cannot write bank file " + path.string());
    if (!bank.version.empty()) out << "# VERSION " << bank.version << '\n';
    out << "# id\tsource\texpression\tnotes\n";
    for (const auto& e : bank.entries) {
        out << e.id << '\t' << source_name(e.source) << '\t' << to_string(e.expr);
        if (!e.notes.empty()) out << '\t' << e.notes;
        out << '\n';
    }
}

std::filesystem::path default_bank_path()
{
    if (const char* env = std::getenv("RESR_BANK"); env && *env) return env;
    return std::filesystem::path(RESR_DATA_DIR) / "bank" / "default.tsv";
}

std::vector<double> materialize(const EquationBankEntry& entry, std::span<const double> t)
{
    std::vector<double> out(t.size());
    Evaluator ev;
    ev.evaluate(entry.expr, t, true, out);
    return out;
}

std::map<BankSource, SourceStats> bank_stats(const EquationBank& bank)
{
    std::map<BankSource, SourceStats> stats;
    std::map<BankSource, std::size_t> nodes;
    for (const auto& e : bank.entries) {
        ++stats[e.source].count;
        nodes[e.source] += complexity(e.expr);
    }
    for (auto& [src, s] : stats) s.mean_complexity = static_cast<double>(nodes[src]) / static_cast<double>(s.count);
    return stats;
}

} // namespace resr
