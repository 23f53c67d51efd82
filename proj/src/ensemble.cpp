#include "locc/ensemble.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace locc {

using json = nlohmann::json;

void StateEnsemble::validate() const {
    if (d_A < 1 || d_B < 1) throw std::invalid_argument("ensemble: local dimensions must be >= 1");
    if (items.empty()) throw std::invalid_argument("ensemble: no states");
    double psum = 0.0;
    for (size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        if (it.prior <= 0.0)
            throw std::invalid_argument("ensemble: state " + std::to_string(i + 1) +
                                        " has non-positive prior");
        psum += it.prior;
        if (it.state.shape() != shape())
            throw std::invalid_argument("ensemble: state " + std::to_string(i + 1) +
                                        " has wrong shape");
        if (std::abs(it.state.trace() - 1.0) > 1e-10)
            throw std::invalid_argument("ensemble: state " + std::to_string(i + 1) +
                                        " does not have unit trace");
        if (!is_psd(it.state, 1e-10))
            throw std::invalid_argument("ensemble: state " + std::to_string(i + 1) +
                                        " is not positive semidefinite");
    }
    if (std::abs(psum - 1.0) > 1e-12)
        throw std::invalid_argument("ensemble: priors do not sum to 1");
}

StateEnsemble ensemble_from_vectors(int d_A, int d_B, const std::vector<VectorXcd>& states,
                                    const std::vector<double>& priors) {
    if (states.size() != priors.size())
        throw std::invalid_argument("ensemble_from_vectors: length mismatch");
    StateEnsemble e;
    e.d_A = d_A;
    e.d_B = d_B;
    const SystemShape sh({d_A, d_B});
    for (size_t i = 0; i < states.size(); ++i) {
        VectorXcd v = states[i].normalized();
        e.items.push_back({priors[i], HermitianOp::projector(sh, v)});
    }
    e.validate();
    return e;
}

StateEnsemble bell_basis_family(double delta, double tau, double xi) {
    const Complex phase = std::exp(Complex(0, 1) * xi);
    const double sd = std::sin(delta), cd = std::cos(delta);
    const double st = std::sin(tau), ct = std::cos(tau);

    // basis order |00>, |01>, |10>, |11>
    VectorXcd p1(4), p2(4), p3(4), p4(4);
    p1 << 0.0, sd, st * cd, -ct * cd;
    p2 << 0.0, cd, -st * sd, ct * sd;
    p3 << -cd * phase, 0.0, ct * sd, st * sd;
    p4 << sd * phase, 0.0, ct * cd, st * cd;

    return ensemble_from_vectors(2, 2, {p1, p2, p3, p4}, {0.25, 0.25, 0.25, 0.25});
}

double tangle(const HermitianOp& pure_state) {
    if (pure_state.shape().factors() != 2)
        throw std::invalid_argument("tangle: state must be bipartite");
    if (std::abs(pure_state.trace() - 1.0) > 1e-10)
        throw std::invalid_argument("tangle: state must have unit trace");
    // rank-1 test: ||rho^2 - rho|| small for a unit-trace projector
    const MatrixXcd& r = pure_state.matrix();
    if ((r * r - r).norm() > 1e-10 * std::max(1.0, r.norm()))
        throw std::invalid_argument("tangle: state is not pure");
    HermitianOp red = partial_trace(pure_state, {2});
    const double purity = (red.matrix() * red.matrix()).trace().real();
    return 2.0 * (1.0 - purity);
}

StateEnsemble double_trine() {
    VectorXcd s0(2), s1(2), s2(2);
    s0 << 1.0, 0.0;
    s1 << -0.5, -std::sqrt(3.0) / 2.0;
    s2 << -0.5, std::sqrt(3.0) / 2.0;
    auto pair = [](const VectorXcd& s) {
        VectorXcd v(4);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) v(2 * i + j) = s(i) * s(j);
        return v;
    };
    return ensemble_from_vectors(2, 2, {pair(s0), pair(s1), pair(s2)},
                                 {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

StateEnsemble ququart_ensemble() {
    auto ket = [](int i, int j) { return 4 * i + j; };
    VectorXcd p1 = VectorXcd::Zero(16), p2 = VectorXcd::Zero(16), p3 = VectorXcd::Zero(16);
    p1(ket(0, 0)) = p1(ket(1, 1)) = p1(ket(2, 2)) = p1(ket(3, 3)) = 0.5;
    p2(ket(0, 3)) = p2(ket(1, 2)) = p2(ket(2, 1)) = p2(ket(3, 0)) = 0.5;
    p3(ket(0, 1)) = p3(ket(1, 0)) = 0.5;
    p3(ket(2, 3)) = p3(ket(3, 2)) = -0.5;
    return ensemble_from_vectors(4, 4, {p1, p2, p3}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

namespace {

json matrix_to_json(const MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXcd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("state matrix: expected array");
    const size_t n = j.size();
    MatrixXcd m(n, n);
    for (size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
            throw std::invalid_argument("state matrix: expected square row-major matrix");
        for (size_t k = 0; k < n; ++k) {
            const auto& cell = j[i][k];
            if (!cell.is_array() || cell.size() != 2)
                throw std::invalid_argument("state matrix: entries must be [re, im] pairs");
            m(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

}  // namespace

std::string ensemble_to_json_string(const StateEnsemble& e) {
    json j;
    j["d_A"] = e.d_A;
    j["d_B"] = e.d_B;
    j["items"] = json::array();
    for (const auto& it : e.items)
        j["items"].push_back({{"prior", it.prior}, {"state", matrix_to_json(it.state.matrix())}});
    return j.dump(2);
}

StateEnsemble ensemble_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument(std::string("ensemble: malformed JSON: ") + err.what());
    }
    if (!j.contains("d_A") || !j.contains("d_B") || !j.contains("items"))
        throw std::invalid_argument("ensemble: missing d_A, d_B or items");
    StateEnsemble e;
    e.d_A = j["d_A"].get<int>();
    e.d_B = j["d_B"].get<int>();
    const SystemShape sh({e.d_A, e.d_B});
    size_t index = 0;
    for (const auto& item : j["items"]) {
        ++index;
        if (!item.contains("prior") || !item.contains("state"))
            throw std::invalid_argument("ensemble: item " + std::to_string(index) +
                                        " missing prior or state");
        MatrixXcd m = matrix_from_json(item["state"]);
        if (m.rows() != sh.total())
            throw std::invalid_argument("ensemble: state " + std::to_string(index) +
                                        " has wrong dimension");
        HermitianOp op;
        try {
            op = HermitianOp(sh, m);
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("ensemble: state " + std::to_string(index) +
                                        " is not Hermitian");
        }
        e.items.push_back({item["prior"].get<double>(), std::move(op)});
    }
    e.validate();
    return e;
}

StateEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ensemble: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ensemble_from_json_string(text);
}

void save_ensemble(const StateEnsemble& e, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("ensemble: cannot write " + path);
    out << ensemble_to_json_string(e) << "\n";
}

StateEnsemble swap_parties(const StateEnsemble& e) {
    StateEnsemble out;
    out.d_A = e.d_B;
    out.d_B = e.d_A;
    const SystemShape sh({out.d_A, out.d_B});
    for (const auto& it : e.items) {
        const MatrixXcd& m = it.state.matrix();
        MatrixXcd sw(m.rows(), m.cols());
        auto remap = [&](long long idx) {
            const long long i = idx / e.d_B, j = idx % e.d_B;
            return j * e.d_A + i;
        };
        for (long long r = 0; r < m.rows(); ++r)
            for (long long c = 0; c < m.cols(); ++c) sw(remap(r), remap(c)) = m(r, c);
        out.items.push_back({it.prior, HermitianOp(sh, sw)});
    }
    return out;
}

}  // namespace locc
