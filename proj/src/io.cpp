#include "nbspectra/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nbspectra {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    if (value == std::floor(value) && std::abs(value) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", value);
        return buf;
    }
    // Shortest precision that parses back exactly.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) return buf;
    }
    return buf;
}

namespace {

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string quoted = "\"";
    for (char ch : cell) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

} // namespace

std::string to_csv(const CsvTable& table) {
    std::ostringstream out;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        out << (c ? "," : "") << csv_escape(table.header[c]);
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << csv_escape(row[c]);
        out << '\n';
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json profile_to_json(const VarianceProfile& profile) {
    nlohmann::json doc;
    doc["n"] = profile.n;
    doc["m"] = profile.m;
    doc["model_kind"] = profile.model_kind == ModelKind::BipartiteBernoulli
                            ? "bipartite_bernoulli"
                            : "bounded_general";
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < profile.n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < profile.m; ++j) row.push_back(profile.s(i, j));
        rows.push_back(std::move(row));
    }
    doc["p"] = std::move(rows);
    if (!profile.name.empty()) doc["name"] = profile.name;
    return doc;
}

namespace {

PSpec pspec_from_json(const nlohmann::json& p) {
    if (p.is_number()) return p.get<double>();
    if (p.is_array()) {
        const Eigen::Index rows = static_cast<Eigen::Index>(p.size());
        if (rows == 0) throw IoError("empty probability matrix");
        const Eigen::Index cols = static_cast<Eigen::Index>(p.at(0).size());
        Eigen::MatrixXd s(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto& row = p.at(static_cast<std::size_t>(i));
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw IoError("ragged probability matrix");
            for (Eigen::Index j = 0; j < cols; ++j)
                s(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        }
        return s;
    }
    if (p.is_object()) {
        BlockSpec blocks;
        for (const auto& v : p.at("row_sizes")) blocks.row_sizes.push_back(v.get<Eigen::Index>());
        for (const auto& v : p.at("col_sizes")) blocks.col_sizes.push_back(v.get<Eigen::Index>());
        const auto& values = p.at("values");
        blocks.values.resize(static_cast<Eigen::Index>(blocks.row_sizes.size()),
                             static_cast<Eigen::Index>(blocks.col_sizes.size()));
        for (Eigen::Index i = 0; i < blocks.values.rows(); ++i)
            for (Eigen::Index j = 0; j < blocks.values.cols(); ++j)
                blocks.values(i, j) = values.at(static_cast<std::size_t>(i))
                                          .at(static_cast<std::size_t>(j))
                                          .get<double>();
        return blocks;
    }
    throw IoError("p must be a number, a matrix, or a block description");
}

} // namespace

VarianceProfile profile_from_json(const nlohmann::json& doc) {
    const Eigen::Index n = doc.at("n").get<Eigen::Index>();
    const Eigen::Index m = doc.at("m").get<Eigen::Index>();
    const std::string kind = doc.value("model_kind", std::string("bipartite_bernoulli"));
    const PSpec spec = pspec_from_json(doc.at("p"));
    VarianceProfile profile;
    if (kind == "bipartite_bernoulli")
        profile = make_bipartite_profile(n, m, spec);
    else if (kind == "bounded_general")
        profile = make_bounded_profile(n, m, spec);
    else
        throw IoError("unknown model_kind: " + kind);
    profile.name = doc.value("name", std::string());
    return profile;
}

VarianceProfile load_profile(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_file(path));
    if (doc.contains("profile")) return profile_from_json(doc.at("profile"));
    return profile_from_json(doc);
}

std::string matrix_to_sparse_csv(const Eigen::MatrixXd& X) {
    std::ostringstream out;
    out << "i,j,value\n";
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            if (X(i, j) != 0.0)
                out << i << ',' << j << ',' << format_double(X(i, j)) << '\n';
    return out.str();
}

std::string nb_operator_to_csv(const NBOperator& B) {
    const DirectedEdgeSet& edges = B.edges();
    std::ostringstream out;
    out << "e_from_i,e_from_j,e_to_k,e_to_l,weight\n";
    for (Eigen::Index e = 0; e < edges.edge_count(); ++e) {
        for (Eigen::Index f : B.out_edges(edges.head[e])) {
            if (edges.head[f] == edges.tail[e]) continue;
            out << edges.tail[e] << ',' << edges.head[e] << ',' << edges.tail[f] << ','
                << edges.head[f] << ',' << format_double(edges.weight[f]) << '\n';
        }
    }
    return out.str();
}

std::string axis_scan_to_csv(const AxisScan& scan) {
    std::ostringstream out;
    out << "beta,min_m1,smallest_eig,psd_flag\n";
    for (const AxisScanRow& row : scan.rows) {
        out << format_double(row.beta) << ',' << format_double(row.min_m1) << ',';
        if (row.valid) out << format_double(row.smallest_eig);
        out << ',' << (row.valid && row.psd ? 1 : 0) << '\n';
    }
    return out.str();
}

nlohmann::json summary_to_json(const SpectralSummary& summary) {
    nlohmann::json doc;
    doc["sigma_max"] = summary.sigma_max;
    if (summary.sigma_min) doc["sigma_min"] = *summary.sigma_min;
    doc["singular_values"] = summary.singular_values;
    doc["method"] = summary.method == SvdMethod::DenseFull ? "dense_full" : "iterative";
    doc["residual"] = summary.residual;
    doc["iterations"] = summary.iterations;
    return doc;
}

} // namespace nbspectra
