#include "syntens/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "syntens/errors.hpp"
#include "syntens/io_util.hpp"

namespace syntens {

void match_norms(EmbeddingMatrix& target, const EmbeddingMatrix& reference) {
    if (target.n() != reference.n())
        throw std::invalid_argument("match_norms: row count mismatch");
    for (int i = 0; i < target.n(); ++i) {
        const double tn = target.vectors.row(i).norm();
        const double rn = reference.vectors.row(i).norm();
        if (tn > 0.0 && rn > 0.0) target.vectors.row(i) *= rn / tn;
    }
}

void save_embeddings(const std::string& path, const EmbeddingMatrix& emb,
                     const Vocabulary& vocab) {
    if (static_cast<std::size_t>(emb.n()) != vocab.size())
        throw std::invalid_argument("save_embeddings: embedding rows != vocabulary size");
    atomic_write(path, [&](std::ostream& out) {
        out << emb.n() << ' ' << emb.d() << '\n';
        for (int i = 0; i < emb.n(); ++i) {
            out << vocab.word_of[i];
            for (int j = 0; j < emb.d(); ++j) out << ' ' << format_double(emb.vectors(i, j));
            out << '\n';
        }
    });
}

EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": empty embedding file");
    std::istringstream hs(header);
    std::int64_t file_n = 0, file_d = 0;
    if (!(hs >> file_n >> file_d) || file_n < 0 || file_d <= 0)
        throw DataError(path + ": bad header (want 'n d')");

    EmbeddingMatrix emb(static_cast<int>(vocab.size()), static_cast<int>(file_d));
    std::vector<bool> seen(vocab.size(), false);
    std::string line;
    std::int64_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        const std::int64_t id = vocab.lookup(word);
        if (id < 0) {
            continue; // file may cover a larger vocabulary
        }
        for (int j = 0; j < file_d; ++j) {
            double v;
            if (!(ss >> v))
                throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(file_d) + " values");
            emb.vectors(id, j) = v;
        }
        seen[static_cast<std::size_t>(id)] = true;
    }
    std::size_t missing = 0;
    for (bool s : seen)
        if (!s) ++missing;
    if (missing > 0)
        throw DataError(path + ": " + std::to_string(missing) +
                        " vocabulary words missing from embedding file");
    return emb;
}

void save_tensor(const std::string& path, const CpTensor& tensor) {
    tensor.validate();
    atomic_write(path, [&](std::ostream& out) {
        out.write("SCT1", 4);
        write_u32(out, static_cast<std::uint32_t>(tensor.dim));
        write_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (int r = 0; r < tensor.rank(); ++r) write_f64(out, tensor.weights[r]);
        auto write_factor = [&](const Matrix& f) {
            for (int r = 0; r < f.rows(); ++r)
                for (int j = 0; j < f.cols(); ++j) write_f64(out, f(r, j));
        };
        write_factor(tensor.factor_a);
        write_factor(tensor.factor_b);
        write_factor(tensor.factor_c);
        // root biases sorted by id for reproducible bytes
        std::vector<std::pair<std::uint32_t, double>> biases(tensor.root_bias.begin(),
                                                             tensor.root_bias.end());
        std::sort(biases.begin(), biases.end());
        write_u32(out, static_cast<std::uint32_t>(biases.size()));
        for (const auto& [id, b] : biases) {
            write_u32(out, id);
            write_f64(out, b);
        }
        write_f64(out, tensor.global_bias);
    }, /*binary=*/true);
}

CpTensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open tensor file: " + path);
    expect_magic(in, "SCT1", path);
    CpTensor t;
    t.dim = static_cast<int>(read_u32(in));
    const std::uint32_t rank = read_u32(in);
    t.weights = Eigen::VectorXd(rank);
    for (std::uint32_t r = 0; r < rank; ++r) t.weights[r] = read_f64(in);
    auto read_factor = [&](Matrix& f) {
        f = Matrix(rank, t.dim);
        for (std::uint32_t r = 0; r < rank; ++r)
            for (int j = 0; j < t.dim; ++j) f(r, j) = read_f64(in);
    };
    read_factor(t.factor_a);
    read_factor(t.factor_b);
    read_factor(t.factor_c);
    const std::uint32_t nbias = read_u32(in);
    for (std::uint32_t k = 0; k < nbias; ++k) {
        const std::uint32_t id = read_u32(in);
        t.root_bias[id] = read_f64(in);
    }
    t.global_bias = read_f64(in);
    t.validate();
    return t;
}

} // namespace syntens
