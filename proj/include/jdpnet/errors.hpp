#pragma once

#include <stdexcept>
#include <string>

namespace jdp {

/// Tensor shapes or channel counts do not line up.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A scalar parameter is outside its valid range.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Bad or missing input data (files, image sets, manifests).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jdp
