#pragma once

#include <string>
#include <vector>

#include "core/errors.hpp"

namespace puc {

/// Column-named numeric result table; the one shape every pipeline output
/// (spectra, traces, field maps, streams) is reduced to at the C boundary.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size())
            raise(Status::invalid_argument, "table row width mismatch");
        data_.insert(data_.end(), row.begin(), row.end());
    }

    std::size_t rows() const { return columns_.empty() ? 0 : data_.size() / columns_.size(); }
    std::size_t cols() const { return columns_.size(); }
    const std::string& column_name(std::size_t c) const { return columns_.at(c); }

    double at(std::size_t r, std::size_t c) const {
        if (c >= cols() || r >= rows()) raise(Status::invalid_argument, "table index out of range");
        return data_[r * cols() + c];
    }

private:
    std::vector<std::string> columns_;
    std::vector<double> data_;
};

} // namespace puc
