#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sardonics/model.hpp"

namespace sardonics {

void save_model(const IsingModel& model, std::ostream& out) {
    out << std::setprecision(17);
    out << "ising " << model.num_spins() << ' ' << model.beta() << '\n';
    for (const auto& e : model.edges())
        out << "e " << e.i << ' ' << e.j << ' ' << e.coupling << '\n';
    const auto& h = model.fields();
    for (int i = 0; i < model.num_spins(); ++i)
        if (h[i] != 0.0) out << "h " << i << ' ' << h[i] << '\n';
    if (model.has_bipartition()) out << "bipartition " << model.bipartition() << '\n';
}

void save_model(const IsingModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_model(model, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

IsingModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty model stream");
    std::istringstream header(line);
    std::string tag;
    int num_spins = 0;
    double beta = 0.0;
    if (!(header >> tag >> num_spins >> beta) || tag != "ising")
        throw std::runtime_error("malformed model header: " + line);

    std::vector<Edge> edges;
    std::vector<double> fields(std::max(num_spins, 0), 0.0);
    int bipartition = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "e") {
            Edge e;
            if (!(ls >> e.i >> e.j >> e.coupling))
                throw std::runtime_error("malformed edge line: " + line);
            edges.push_back(e);
        } else if (kind == "h") {
            int i;
            double v;
            if (!(ls >> i >> v)) throw std::runtime_error("malformed field line: " + line);
            if (i < 0 || i >= num_spins)
                throw std::runtime_error("field index out of range: " + line);
            fields[i] = v;
        } else if (kind == "bipartition") {
            if (!(ls >> bipartition))
                throw std::runtime_error("malformed bipartition line: " + line);
        } else {
            throw std::runtime_error("unknown model line: " + line);
        }
    }
    return IsingModel(num_spins, std::move(edges), std::move(fields), beta, bipartition);
}

IsingModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace sardonics
