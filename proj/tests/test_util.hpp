#ifndef PTAWCET_TEST_UTIL_HPP
#define PTAWCET_TEST_UTIL_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ptawcet/model.hpp"

namespace ptawcet_test {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string model_path(const std::string& name) {
    return std::string(PTAWCET_MODELS_DIR) + "/" + name;
}

inline ptawcet::Pta load_model(const std::string& name) {
    return ptawcet::parse_model(read_file(model_path(name)));
}

}  // namespace ptawcet_test

#endif
