#include "rgcov/transforms.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

namespace rgcov {

namespace {

using nlohmann::json;

double powi(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

}  // namespace

double Transform::operator()(double u) const {
  const double au = std::abs(u);
  switch (kind) {
    case TransformKind::Linear:     return u;
    case TransformKind::Square:     return u * u;
    case TransformKind::Cube:       return u * u * u;
    case TransformKind::Sign:       return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    case TransformKind::Abs:        return au;
    case TransformKind::AbsCube:    return au * au * au;
    case TransformKind::LogAbs:     return std::log(std::max(au, kLogGuard));
    case TransformKind::LogAbsSq: {
      const double l = std::log(std::max(au, kLogGuard));
      return l * l;
    }
    case TransformKind::LogAbsCube: {
      const double l = std::log(std::max(au, kLogGuard));
      return l * l * l;
    }
    case TransformKind::SqrtAbs:    return std::sqrt(au);
    case TransformKind::PowerExp:   return powi(au, power) * std::exp(-damping * au);
  }
  return u;
}

std::string Transform::name() const {
  switch (kind) {
    case TransformKind::Linear:     return "linear";
    case TransformKind::Square:     return "square";
    case TransformKind::Cube:       return "cube";
    case TransformKind::Sign:       return "sign";
    case TransformKind::Abs:        return "abs";
    case TransformKind::AbsCube:    return "abscube";
    case TransformKind::LogAbs:     return "logabs";
    case TransformKind::LogAbsSq:   return "logabssq";
    case TransformKind::LogAbsCube: return "logabscube";
    case TransformKind::SqrtAbs:    return "sqrtabs";
    case TransformKind::PowerExp: {
      std::ostringstream os;
      os << "powerexp:" << power << ":" << damping;
      return os.str();
    }
  }
  return "linear";
}

TransformedSeries apply(const Matrix& u, const TransformSpec& spec) {
  const int n = static_cast<int>(u.rows());
  const int T = static_cast<int>(u.cols());
  const int J = spec.size();
  require(n >= 1 && T >= 1, ErrorKind::Domain, "apply: empty input series");
  require(J >= 1, ErrorKind::Domain, "apply: empty transform spec");

  TransformedSeries out;
  out.source_dim = n;
  out.num_transforms = J;
  out.values.resize(static_cast<long>(J) * n, T);

  // Share |u| and log|u| across the battery; they dominate the cost for the
  // named set (one log per element instead of one per log-family member).
  bool wants_log = false;
  for (const Transform& tr : spec.items) {
    if (tr.kind == TransformKind::LogAbs || tr.kind == TransformKind::LogAbsSq ||
        tr.kind == TransformKind::LogAbsCube) {
      wants_log = true;
    }
  }

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      const double x = u(i, t);
      const double ax = std::abs(x);
      const double lx = wants_log ? std::log(std::max(ax, kLogGuard)) : 0.0;
      for (int j = 0; j < J; ++j) {
        const Transform& tr = spec.items[j];
        double value;
        switch (tr.kind) {
          case TransformKind::Linear:     value = x; break;
          case TransformKind::Square:     value = x * x; break;
          case TransformKind::Cube:       value = x * x * x; break;
          case TransformKind::Sign:       value = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); break;
          case TransformKind::Abs:        value = ax; break;
          case TransformKind::AbsCube:    value = ax * ax * ax; break;
          case TransformKind::LogAbs:     value = lx; break;
          case TransformKind::LogAbsSq:   value = lx * lx; break;
          case TransformKind::LogAbsCube: value = lx * lx * lx; break;
          case TransformKind::SqrtAbs:    value = std::sqrt(ax); break;
          case TransformKind::PowerExp:
            value = powi(ax, tr.power) * std::exp(-tr.damping * ax);
            break;
          default: value = x; break;
        }
        out.values(static_cast<long>(j) * n + i, t) = value;
      }
    }
  }
  return out;
}

TransformSpec named_battery() {
  TransformSpec spec;
  spec.items = {
      {TransformKind::Linear},     {TransformKind::Square},
      {TransformKind::Cube},       {TransformKind::Sign},
      {TransformKind::Abs},        {TransformKind::AbsCube},
      {TransformKind::LogAbs},     {TransformKind::LogAbsSq},
      {TransformKind::LogAbsCube}, {TransformKind::SqrtAbs},
  };
  return spec;
}

TransformSpec dense_subsystem(int n_points, int p_max) {
  require(n_points >= 1, ErrorKind::Domain, "dense_subsystem: n_points must be >= 1");
  require(p_max >= 0, ErrorKind::Domain, "dense_subsystem: p_max must be >= 0");
  TransformSpec spec;
  for (int p = 0; p <= p_max; ++p) {
    for (int j = 1; j <= n_points; ++j) {
      Transform tr;
      tr.kind = TransformKind::PowerExp;
      tr.power = p;
      tr.damping = static_cast<double>(j) / n_points;
      spec.items.push_back(tr);
    }
  }
  return spec;
}

namespace {

Transform named_transform(const std::string& name) {
  if (name == "linear") return {TransformKind::Linear};
  if (name == "square") return {TransformKind::Square};
  if (name == "cube") return {TransformKind::Cube};
  if (name == "sign") return {TransformKind::Sign};
  if (name == "abs") return {TransformKind::Abs};
  if (name == "abscube") return {TransformKind::AbsCube};
  if (name == "logabs") return {TransformKind::LogAbs};
  if (name == "logabssq") return {TransformKind::LogAbsSq};
  if (name == "logabscube") return {TransformKind::LogAbsCube};
  if (name == "sqrtabs") return {TransformKind::SqrtAbs};
  throw_error(ErrorKind::Config, "unknown transform name: " + name);
}

Transform powerexp_from(const json& body) {
  require(body.contains("p") && body.contains("t"), ErrorKind::Config,
          "powerexp transform requires fields p and t");
  Transform tr;
  tr.kind = TransformKind::PowerExp;
  tr.power = body.at("p").get<int>();
  tr.damping = body.at("t").get<double>();
  require(tr.power >= 0, ErrorKind::Config, "powerexp power must be >= 0");
  require(tr.damping >= 0.0, ErrorKind::Config, "powerexp damping must be >= 0");
  return tr;
}

}  // namespace

std::string to_json(const TransformSpec& spec) {
  json arr = json::array();
  for (const Transform& tr : spec.items) {
    if (tr.kind == TransformKind::PowerExp) {
      arr.push_back(json{{"powerexp", {{"p", tr.power}, {"t", tr.damping}}}});
    } else {
      arr.push_back(tr.name());
    }
  }
  return arr.dump();
}

TransformSpec transform_spec_from_json(const std::string& json_text) {
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw_error(ErrorKind::Config, std::string("transform spec is not valid JSON: ") + e.what());
  }
  require(arr.is_array(), ErrorKind::Config, "transform spec must be a JSON array");
  TransformSpec spec;
  for (const json& entry : arr) {
    if (entry.is_string()) {
      spec.items.push_back(named_transform(entry.get<std::string>()));
    } else if (entry.is_object() && entry.contains("powerexp")) {
      spec.items.push_back(powerexp_from(entry.at("powerexp")));
    } else {
      throw_error(ErrorKind::Config,
                  "transform entries must be names or {\"powerexp\": {...}}");
    }
  }
  require(!spec.items.empty(), ErrorKind::Config, "transform spec must not be empty");
  return spec;
}

TransformSpec transform_spec_from_csv(const std::string& list) {
  TransformSpec spec;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item.rfind("powerexp:", 0) == 0) {
      std::stringstream ps(item.substr(9));
      std::string p_str, t_str;
      require(std::getline(ps, p_str, ':') && std::getline(ps, t_str, ':'),
              ErrorKind::Config, "powerexp needs the form powerexp:<p>:<t>");
      Transform tr;
      tr.kind = TransformKind::PowerExp;
      try {
        tr.power = std::stoi(p_str);
        tr.damping = std::stod(t_str);
      } catch (const std::exception&) {
        throw_error(ErrorKind::Config, "could not parse powerexp parameters in: " + item);
      }
      require(tr.power >= 0 && tr.damping >= 0.0, ErrorKind::Config,
              "powerexp parameters must be non-negative");
      spec.items.push_back(tr);
    } else {
      spec.items.push_back(named_transform(item));
    }
  }
  require(!spec.items.empty(), ErrorKind::Config, "transform list must not be empty");
  return spec;
}

}  // namespace rgcov
