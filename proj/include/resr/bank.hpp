// SPDX-License-Identifier: MIT

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "resr/expr.hpp"

namespace resr {

enum class BankSource { Feynman, Nguyen, Augmented };

std::string_view source_name(BankSource s) noexcept;
BankSource source_from_name(std::string_view name); // throws std::invalid_argument

struct EquationBankEntry {
    std::string id;
    BankSource source = BankSource::Augmented;
    Expr expr;
    std::string notes;

    friend bool operator==(const EquationBankEntry&, const EquationBankEntry&) = default;
};

struct EquationBank {
    std::vector<EquationBankEntry> entries;
    std::string version;
    std::vector<std::string> warnings; // one per rejected line

    std::size_t size() const noexcept { return entries.size(); }
    const EquationBankEntry* find(std::string_view id) const;
};

class BankError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Entries must evaluate finitely (protected ops) on this share of the probe
// grid, 100 points spanning [0.1, 10].
inline constexpr double kBankFiniteFraction = 0.9;
bool passes_finiteness(const Expr& e);

// Line format: id<TAB>source<TAB>expression[<TAB>notes]. Lines starting with
// '#' are comments; "# VERSION <v>" sets the version. Bad lines become
// warnings; unreadable input, a duplicate id or zero valid entries throw.
EquationBank load_bank(const std::filesystem::path& path);
EquationBank read_bank(std::istream& in, const std::string& origin = "<stream>");
void save_bank(const std::filesystem::path& path, const EquationBank& bank);

// $RESR_BANK if set, otherwise the bank shipped in the source tree.
std::filesystem::path default_bank_path();

std::vector<double> materialize(const EquationBankEntry& entry, std::span<const double> t);

struct SourceStats {
    std::size_t count = 0;
    double mean_complexity = 0.0;
};
std::map<BankSource, SourceStats> bank_stats(const EquationBank& bank);

} // namespace resr
