#include "qlens/description.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qlens {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a decimal number");
    return j.get<double>();
}

Complex complex_at(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected [re, im] pair");
    return {number_at(j[0], where + "[0]"), number_at(j[1], where + "[1]")};
}

ComplexMatrix matrix_at(const json& j, const std::string& where, Eigen::Index rows,
                        Eigen::Index cols) {
    if (!j.is_array()) fail(where, "expected a list of rows");
    if (static_cast<Eigen::Index>(j.size()) != rows)
        fail(where, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        const std::string rw = where + "[" + std::to_string(i) + "]";
        if (!row.is_array()) fail(rw, "expected a row list");
        if (static_cast<Eigen::Index>(row.size()) != cols)
            fail(rw, "expected " + std::to_string(cols) + " entries, got " +
                         std::to_string(row.size()));
        for (Eigen::Index k = 0; k < cols; ++k)
            m(i, k) = complex_at(row[static_cast<std::size_t>(k)],
                                 rw + "[" + std::to_string(k) + "]");
    }
    return m;
}

RealMatrix real_matrix_at(const json& j, const std::string& where, Eigen::Index rows,
                          Eigen::Index cols) {
    const ComplexMatrix m = matrix_at(j, where, rows, cols);
    if (max_abs(RealMatrix(m.imag())) > 0.0)
        fail(where, "expected real entries (imaginary parts must be 0)");
    return m.real();
}

Eigen::Index index_at(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 0) fail(where, "expected a nonnegative integer");
    return static_cast<Eigen::Index>(v);
}

const json& field(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
    return *it;
}

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            row.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

json matrix_to_json(const RealMatrix& m) {
    return matrix_to_json(ComplexMatrix(m.cast<Complex>()));
}

}  // namespace

SystemDescription parse_description(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("document: ") + e.what());
    }
    if (!j.is_object()) fail("document", "top level must be an object");

    SystemDescription d;
    if (j.contains("name")) {
        if (!j["name"].is_string()) fail("name", "expected a string");
        d.name = j["name"].get<std::string>();
    }

    if (j.contains("S") || j.contains("C_minus") || j.contains("Omega_minus")) {
        const Eigen::Index n = index_at(field(j, "n", "document"), "n");
        const Eigen::Index m = index_at(field(j, "m", "document"), "m");
        SystemParams p;
        // scattering defaults to the identity when omitted
        p.scattering = j.contains("S") ? matrix_at(j["S"], "S", m, m)
                                       : ComplexMatrix(ComplexMatrix::Identity(m, m));
        p.coupling_minus = matrix_at(field(j, "C_minus", "document"), "C_minus", m, n);
        p.coupling_plus = matrix_at(field(j, "C_plus", "document"), "C_plus", m, n);
        p.omega_minus = matrix_at(field(j, "Omega_minus", "document"), "Omega_minus", n, n);
        p.omega_plus = matrix_at(field(j, "Omega_plus", "document"), "Omega_plus", n, n);
        d.system = std::move(p);
    }

    if (j.contains("partition")) {
        const json& pj = j["partition"];
        KalmanPartitionSpec spec;
        spec.n_co = index_at(field(pj, "n1", "partition"), "partition.n1");
        spec.n_isolated = index_at(field(pj, "n2", "partition"), "partition.n2");
        spec.n_paired = index_at(field(pj, "n3", "partition"), "partition.n3");
        if (!d.system) fail("partition", "a partition needs the system section for its sizes");
        const Eigen::Index dim = 2 * (spec.n_co + spec.n_isolated + spec.n_paired);
        const Eigen::Index m2 = 2 * d.system->num_channels();
        spec.a = real_matrix_at(field(pj, "A", "partition"), "partition.A", dim, dim);
        spec.b = real_matrix_at(field(pj, "B", "partition"), "partition.B", dim, m2);
        spec.c = real_matrix_at(field(pj, "C", "partition"), "partition.C", m2, dim);
        d.partition = std::move(spec);
    }

    if (j.contains("plant")) {
        const json& pj = j["plant"];
        PartitionedPlant p;
        p.num_modes_count = index_at(field(pj, "n", "plant"), "plant.n");
        p.m1 = index_at(field(pj, "m1", "plant"), "plant.m1");
        p.m2 = index_at(field(pj, "m2", "plant"), "plant.m2");
        const Eigen::Index mt = p.m1 + p.m2;
        const ComplexMatrix s = matrix_at(field(pj, "S", "plant"), "plant.S", mt, mt);
        p.s11 = s.topLeftCorner(p.m1, p.m1);
        p.s12 = s.topRightCorner(p.m1, p.m2);
        p.s21 = s.bottomLeftCorner(p.m2, p.m1);
        p.s22 = s.bottomRightCorner(p.m2, p.m2);
        p.k11 = matrix_at(field(pj, "k11", "plant"), "plant.k11", p.m1, p.num_modes_count);
        p.k12 = matrix_at(field(pj, "k12", "plant"), "plant.k12", p.m1, p.num_modes_count);
        p.k21 = matrix_at(field(pj, "k21", "plant"), "plant.k21", p.m2, p.num_modes_count);
        p.k22 = matrix_at(field(pj, "k22", "plant"), "plant.k22", p.m2, p.num_modes_count);
        p.omega_minus = matrix_at(field(pj, "Omega_minus", "plant"), "plant.Omega_minus",
                                  p.num_modes_count, p.num_modes_count);
        p.omega_plus = matrix_at(field(pj, "Omega_plus", "plant"), "plant.Omega_plus",
                                 p.num_modes_count, p.num_modes_count);
        d.plant = std::move(p);
    }

    if (j.contains("beamsplitter")) {
        const json& bj = j["beamsplitter"];
        const json& sb = field(bj, "S_b", "beamsplitter");
        if (!sb.is_array() || sb.empty()) fail("beamsplitter.S_b", "expected a matrix");
        const Eigen::Index m2 = static_cast<Eigen::Index>(sb.size());
        d.beamsplitter = BeamsplitterParams{matrix_at(sb, "beamsplitter.S_b", m2, m2)};
    }

    if (j.contains("optomech")) {
        const json& oj = j["optomech"];
        OptomechParams p{};
        p.detuning1 = number_at(field(oj, "Delta1", "optomech"), "optomech.Delta1");
        p.detuning2 = number_at(field(oj, "Delta2", "optomech"), "optomech.Delta2");
        p.mechanical_freq = number_at(field(oj, "omega_m", "optomech"), "optomech.omega_m");
        p.coupling1 = number_at(field(oj, "lambda1", "optomech"), "optomech.lambda1");
        p.coupling2 = number_at(field(oj, "lambda2", "optomech"), "optomech.lambda2");
        p.damping = number_at(field(oj, "kappa", "optomech"), "optomech.kappa");
        d.optomech = p;
    }

    if (j.contains("sim")) {
        const json& sj = j["sim"];
        SimSettings s;
        if (sj.contains("dt")) s.dt = number_at(sj["dt"], "sim.dt");
        if (sj.contains("horizon")) s.horizon = number_at(sj["horizon"], "sim.horizon");
        if (sj.contains("seed")) s.seed = static_cast<std::uint64_t>(index_at(sj["seed"], "sim.seed"));
        if (sj.contains("ensemble"))
            s.ensemble = static_cast<int>(index_at(sj["ensemble"], "sim.ensemble"));
        d.sim = s;
    }

    return d;
}

SystemDescription load_description(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_description(buf.str());
}

std::string write_description(const SystemDescription& d) {
    ordered_json j;
    j["name"] = d.name;
    if (d.system) {
        j["n"] = d.system->num_modes();
        j["m"] = d.system->num_channels();
        j["S"] = matrix_to_json(d.system->scattering);
        j["C_minus"] = matrix_to_json(d.system->coupling_minus);
        j["C_plus"] = matrix_to_json(d.system->coupling_plus);
        j["Omega_minus"] = matrix_to_json(d.system->omega_minus);
        j["Omega_plus"] = matrix_to_json(d.system->omega_plus);
    }
    if (d.partition) {
        ordered_json pj;
        pj["n1"] = d.partition->n_co;
        pj["n2"] = d.partition->n_isolated;
        pj["n3"] = d.partition->n_paired;
        pj["A"] = matrix_to_json(d.partition->a);
        pj["B"] = matrix_to_json(d.partition->b);
        pj["C"] = matrix_to_json(d.partition->c);
        j["partition"] = std::move(pj);
    }
    if (d.plant) {
        ordered_json pj;
        pj["n"] = d.plant->num_modes_count;
        pj["m1"] = d.plant->m1;
        pj["m2"] = d.plant->m2;
        pj["S"] = matrix_to_json(d.plant->assembled_scattering());
        pj["k11"] = matrix_to_json(d.plant->k11);
        pj["k12"] = matrix_to_json(d.plant->k12);
        pj["k21"] = matrix_to_json(d.plant->k21);
        pj["k22"] = matrix_to_json(d.plant->k22);
        pj["Omega_minus"] = matrix_to_json(d.plant->omega_minus);
        pj["Omega_plus"] = matrix_to_json(d.plant->omega_plus);
        j["plant"] = std::move(pj);
    }
    if (d.beamsplitter) {
        ordered_json bj;
        bj["S_b"] = matrix_to_json(d.beamsplitter->s_b);
        j["beamsplitter"] = std::move(bj);
    }
    if (d.optomech) {
        ordered_json oj;
        oj["Delta1"] = d.optomech->detuning1;
        oj["Delta2"] = d.optomech->detuning2;
        oj["omega_m"] = d.optomech->mechanical_freq;
        oj["lambda1"] = d.optomech->coupling1;
        oj["lambda2"] = d.optomech->coupling2;
        oj["kappa"] = d.optomech->damping;
        j["optomech"] = std::move(oj);
    }
    if (d.sim) {
        ordered_json sj;
        sj["dt"] = d.sim->dt;
        sj["horizon"] = d.sim->horizon;
        sj["seed"] = d.sim->seed;
        sj["ensemble"] = d.sim->ensemble;
        j["sim"] = std::move(sj);
    }
    return j.dump(2) + "\n";
}

void save_description(const SystemDescription& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError(path + ": cannot write file");
    out << write_description(d);
}

}  // namespace qlens
