#pragma once

#include <string>
#include <vector>

#include "qlens/algebra.hpp"

// Deterministic key-value analysis documents: insertion-ordered entries,
// floats printed with 17 significant digits, so identical inputs and seeds
// render byte-identical output.

namespace qlens {

enum class DocumentFormat { Text, Structured };

std::string format_float(double v);

// FNV-1a over raw bytes, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

class Document {
   public:
    void section(const std::string& title);
    void put(const std::string& key, const std::string& value);
    void put(const std::string& key, const char* value);
    void put(const std::string& key, double value);
    void put(const std::string& key, bool value);
    void put_count(const std::string& key, long long value);
    void put_matrix(const std::string& key, const ComplexMatrix& m);
    void put_matrix(const std::string& key, const RealMatrix& m);
    void put_vector(const std::string& key, const RealVector& v);

    std::string render(DocumentFormat format) const;

   private:
    struct Entry {
        bool is_section;
        std::string key;
        std::string value;
    };
    std::vector<Entry> entries_;
};

}  // namespace qlens
