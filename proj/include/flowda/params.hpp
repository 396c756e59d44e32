#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "flowda/autodiff.hpp"
#include "flowda/errors.hpp"

namespace flowda {

// Ordered collection of named parameter tensors. Iteration order is the key
// order, which keeps every elementwise pass over a model deterministic.
class ParamStore {
 public:
  using Map = std::map<std::string, ad::Tensor>;

  ad::Tensor& add(const std::string& name, ad::Tensor t) {
    require(!tensors_.count(name), "ParamStore::add: duplicate name '" + name + "'");
    return tensors_.emplace(name, std::move(t)).first->second;
  }

  bool has(const std::string& name) const { return tensors_.count(name) != 0; }

  ad::Tensor& get(const std::string& name) {
    auto it = tensors_.find(name);
    require(it != tensors_.end(), "ParamStore::get: unknown name '" + name + "'");
    return it->second;
  }

  const ad::Tensor& get(const std::string& name) const {
    auto it = tensors_.find(name);
    require(it != tensors_.end(), "ParamStore::get: unknown name '" + name + "'");
    return it->second;
  }

  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }
  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }
  std::size_t tensor_count() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors_) n += t.size();
    return n;
  }

  // Same names and same shapes.
  bool same_layout(const ParamStore& other) const {
    if (tensors_.size() != other.tensors_.size()) return false;
    auto it = tensors_.begin();
    auto jt = other.tensors_.begin();
    for (; it != tensors_.end(); ++it, ++jt) {
      if (it->first != jt->first || it->second.shape != jt->second.shape) return false;
    }
    return true;
  }

  bool all_finite() const {
    for (const auto& [name, t] : tensors_)
      for (double v : t.x)
        if (!std::isfinite(v)) return false;
    return true;
  }

  // Zero-filled store with this store's layout (gradient accumulators,
  // optimizer moments).
  ParamStore zeros_like() const {
    ParamStore out;
    for (const auto& [name, t] : tensors_) out.add(name, ad::Tensor(t.shape));
    return out;
  }

 private:
  Map tensors_;
};

}  // namespace flowda
