#include "qlens/report.hpp"

#include <cstdio>

namespace qlens {

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Document::section(const std::string& title) {
    entries_.push_back({true, title, ""});
}

void Document::put(const std::string& key, const std::string& value) {
    entries_.push_back({false, key, value});
}

void Document::put(const std::string& key, const char* value) {
    put(key, std::string(value));
}

void Document::put(const std::string& key, double value) {
    put(key, format_float(value));
}

void Document::put(const std::string& key, bool value) {
    put(key, std::string(value ? "true" : "false"));
}

void Document::put_count(const std::string& key, long long value) {
    put(key, std::to_string(value));
}

void Document::put_matrix(const std::string& key, const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::string row;
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) row += "  ";
            row += "(" + format_float(m(i, k).real()) + ", " + format_float(m(i, k).imag()) + ")";
        }
        put(key + "[" + std::to_string(i) + "]", row);
    }
}

void Document::put_matrix(const std::string& key, const RealMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::string row;
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k) row += "  ";
            row += format_float(m(i, k));
        }
        put(key + "[" + std::to_string(i) + "]", row);
    }
}

void Document::put_vector(const std::string& key, const RealVector& v) {
    std::string row;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) row += "  ";
        row += format_float(v(i));
    }
    put(key, row);
}

std::string Document::render(DocumentFormat format) const {
    std::string out;
    bool first = true;
    for (const Entry& e : entries_) {
        if (e.is_section) {
            if (format == DocumentFormat::Structured) {
                out += "[" + e.key + "]\n";
            } else {
                if (!first) out += "\n";
                out += "== " + e.key + " ==\n";
            }
        } else {
            out += e.key + " = " + e.value + "\n";
        }
        first = false;
    }
    return out;
}

}  // namespace qlens
