#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "fairdec/decorrelate.hpp"
#include "fairdec/experiment.hpp"
#include "fairdec/fairness.hpp"
#include "fairdec/glm.hpp"
#include "fairdec/numerics.hpp"
#include "fairdec/simulate.hpp"
#include "fairdec/stats.hpp"
#include "fairdec/survival.hpp"

namespace py = pybind11;
using namespace fairdec;

namespace {

struct PyMarginal {
    MarginalSpec spec;
};

std::vector<int> to_int_vector(const py::array_t<double>& a) {
    std::vector<int> out(static_cast<std::size_t>(a.size()));
    auto r = a.unchecked<1>();
    for (py::ssize_t i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(r(i));
    return out;
}

std::vector<double> to_double_vector(const py::array_t<double>& a) {
    std::vector<double> out(static_cast<std::size_t>(a.size()));
    auto r = a.unchecked<1>();
    for (py::ssize_t i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = r(i);
    return out;
}

py::dict metric_set_dict(const MetricSet& m) {
    py::dict d;
    d["accuracy"] = m.accuracy ? py::object(py::float_(*m.accuracy)) : py::none();
    d["acceptance_rate"] =
        m.acceptance_rate ? py::object(py::float_(*m.acceptance_rate)) : py::none();
    d["tpr"] = m.tpr ? py::object(py::float_(*m.tpr)) : py::none();
    d["fpr"] = m.fpr ? py::object(py::float_(*m.fpr)) : py::none();
    return d;
}

}  // namespace

PYBIND11_MODULE(_fairdec, m) {
    m.doc() = "Core routines: copula simulation, decorrelation, weighted "
              "logistic regression, fairness metrics, survival expansion";

    py::register_exception<ConfigError>(m, "FairdecConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "FairdecDataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "FairdecNumericError", PyExc_ArithmeticError);

    m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));
    m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));

    py::class_<PyMarginal>(m, "Marginal");
    m.def("normal", [](double mean, double sd) {
        MarginalSpec s = NormalMarginal{mean, sd};
        validate(s);
        return PyMarginal{s};
    }, py::arg("mean"), py::arg("sd"));
    m.def("uniform", [](double a, double b) {
        MarginalSpec s = UniformMarginal{a, b};
        validate(s);
        return PyMarginal{s};
    }, py::arg("a"), py::arg("b"));
    m.def("bernoulli", [](double p) {
        MarginalSpec s = BernoulliMarginal{p};
        validate(s);
        return PyMarginal{s};
    }, py::arg("p"));
    m.def("attenuation_factor", [](const PyMarginal& a, const PyMarginal& b) {
        return attenuation_factor(a.spec, b.spec);
    }, py::arg("a"), py::arg("b"));
    m.def("bernoulli_threshold", &bernoulli_threshold, py::arg("u"), py::arg("p"));

    m.def("build_latent_correlation", [](int dim, const std::vector<double>& entries) {
        return Eigen::MatrixXd(build_latent_correlation(dim, entries));
    }, py::arg("dim"), py::arg("strict_lower"));

    m.def("simulate_replicate", [](const std::string& spec_json, std::uint64_t replicate) {
        const SimulationSpec spec = SimulationSpec::from_json(nlohmann::json::parse(spec_json));
        const Dataset ds = sample_dataset(spec, replicate);
        py::dict out;
        for (const auto& c : ds.columns) {
            py::array_t<double> arr(static_cast<py::ssize_t>(c.num.size()));
            auto w = arr.mutable_unchecked<1>();
            for (std::size_t i = 0; i < c.num.size(); ++i) {
                w(static_cast<py::ssize_t>(i)) = c.num[i];
            }
            out[py::str(c.name)] = arr;
        }
        return out;
    }, py::arg("spec_json"), py::arg("replicate") = 0,
       "Simulate one replicate; returns a dict of column arrays.");

    py::class_<TransitionMatrix>(m, "TransitionMatrix")
        .def_property_readonly("matrix",
                               [](const TransitionMatrix& a) { return a.rows; })
        .def_property_readonly("sensitive",
                               [](const TransitionMatrix& a) { return a.sensitive; })
        .def_property_readonly("column_means",
                               [](const TransitionMatrix& a) { return a.column_means; })
        .def("apply", [](const TransitionMatrix& a, const Eigen::MatrixXd& data) {
            return apply_transition(a, data);
        }, py::arg("data"))
        .def("to_json", [](const TransitionMatrix& a) { return a.to_json().dump(); });

    m.def("fit_transition", [](const Eigen::MatrixXd& data, const std::vector<int>& sensitive) {
        return fit_transition(data, sensitive);
    }, py::arg("data"), py::arg("sensitive_indices"));

    py::class_<FittedModel>(m, "LogisticFit")
        .def_property_readonly("names", [](const FittedModel& f) { return f.names; })
        .def_property_readonly("coef", [](const FittedModel& f) { return f.coef; })
        .def_property_readonly("se", [](const FittedModel& f) { return f.se; })
        .def_property_readonly("p_values", [](const FittedModel& f) { return f.p_values; })
        .def_property_readonly("converged", [](const FittedModel& f) { return f.converged; })
        .def_property_readonly("iterations", [](const FittedModel& f) { return f.iterations; })
        .def_property_readonly("log_likelihood",
                               [](const FittedModel& f) { return f.log_likelihood; })
        .def_property_readonly("diagnostic", [](const FittedModel& f) { return f.diagnostic; })
        .def("predict_proba", [](const FittedModel& f, const Eigen::MatrixXd& X) {
            return Eigen::VectorXd(predict_proba(f, X));
        }, py::arg("X"))
        .def("to_json", [](const FittedModel& f) { return f.to_json().dump(); });

    m.def("fit_weighted_logistic",
          [](const Eigen::MatrixXd& X, const py::array_t<double>& y,
             const py::object& w, const std::vector<std::string>& names) {
              const std::vector<int> yv = to_int_vector(y);
              std::vector<double> wv;
              if (w.is_none()) {
                  wv.assign(yv.size(), 1.0);
              } else {
                  wv = to_double_vector(w.cast<py::array_t<double>>());
              }
              return fit_weighted_logistic(X, yv, wv, names);
          },
          py::arg("X"), py::arg("y"), py::arg("w") = py::none(),
          py::arg("names") = std::vector<std::string>{});

    m.def("calibrate_threshold", [](const py::array_t<double>& probs, double target) {
        const auto pv = to_double_vector(probs);
        const ThresholdResult t = calibrate_threshold(pv, target);
        return py::make_tuple(t.threshold, t.realized_rate, t.tie_flagged);
    }, py::arg("probabilities"), py::arg("target_rate"));

    m.def("roc_auc", [](const py::array_t<double>& y, const py::array_t<double>& scores) {
        const auto a = roc_auc(to_int_vector(y), to_double_vector(scores));
        return a ? py::object(py::float_(*a)) : py::none();
    }, py::arg("y"), py::arg("scores"));

    m.def("confusion", [](const py::array_t<double>& y_true, const py::array_t<double>& y_pred,
                          int positive_label) {
        const ConfusionMatrix cm =
            confusion(to_int_vector(y_true), to_int_vector(y_pred), positive_label);
        return py::make_tuple(cm.tp, cm.fn, cm.fp, cm.tn);
    }, py::arg("y_true"), py::arg("y_pred"), py::arg("positive_label") = 1);

    m.def("metric_set", [](long tp, long fn, long fp, long tn) {
        ConfusionMatrix cm;
        cm.tp = tp;
        cm.fn = fn;
        cm.fp = fp;
        cm.tn = tn;
        return metric_set_dict(metric_set(cm));
    }, py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));

    m.def("disparate_impact", [](double p0, double p1) {
        const auto v = disparate_impact(p0, p1);
        return v ? py::object(py::float_(*v)) : py::none();
    }, py::arg("p0"), py::arg("p1"));

    m.def("imbalance_ratio", [](const std::vector<long>& counts) {
        const auto v = imbalance_ratio(counts);
        return v ? py::object(py::float_(*v)) : py::none();
    }, py::arg("counts"));

    m.def("group_metrics_json",
          [](const py::array_t<double>& y_true, const py::array_t<double>& y_pred,
             const std::map<std::string, std::vector<std::string>>& groups,
             int positive_label) {
              Dataset ds;
              ds.rows = static_cast<std::size_t>(y_true.size());
              Column outcome;
              outcome.name = "outcome";
              outcome.role = Role::Outcome;
              outcome.kind = Kind::Numeric;
              outcome.num = to_double_vector(y_true);
              ds.columns.push_back(std::move(outcome));
              std::vector<std::string> names;
              for (const auto& [name, labels] : groups) {
                  Column c;
                  c.name = name;
                  c.role = Role::Sensitive;
                  c.kind = Kind::Categorical;
                  c.cat = labels;
                  ds.columns.push_back(std::move(c));
                  names.push_back(name);
              }
              const GroupMetricsReport rep =
                  group_report(ds, to_int_vector(y_pred), names, positive_label);
              return rep.to_json().dump();
          },
          py::arg("y_true"), py::arg("y_pred"), py::arg("groups"),
          py::arg("positive_label") = 1,
          "Fairness report over group labels; returns the report as a JSON string.");

    m.def("pseudo_table",
          [](const std::vector<int>& age, const std::vector<int>& year,
             const std::vector<long>& months, const std::vector<int>& death_cause,
             const py::object& death_flag) {
              const std::size_t n = age.size();
              if (year.size() != n || months.size() != n || death_cause.size() != n) {
                  throw ShapeError("pseudo_table: input lengths differ");
              }
              std::vector<int> flag = death_cause;
              if (!death_flag.is_none()) flag = death_flag.cast<std::vector<int>>();
              std::vector<SurvivalRecord> records(n);
              for (std::size_t i = 0; i < n; ++i) {
                  records[i].id = std::to_string(i + 1);
                  records[i].age_at_diagnosis = age[i];
                  records[i].year_of_diagnosis = year[i];
                  records[i].survival_months = months[i];
                  records[i].death_cause_matches = death_cause[i];
                  records[i].death_flag = flag[i];
              }
              const std::vector<PseudoRow> rows = build_pseudo_table(records);
              py::dict out;
              const std::size_t k = rows.size();
              py::array_t<long> id(static_cast<py::ssize_t>(k)), j(static_cast<py::ssize_t>(k)),
                  duration(static_cast<py::ssize_t>(k)), page(static_cast<py::ssize_t>(k)),
                  pyear(static_cast<py::ssize_t>(k)), death(static_cast<py::ssize_t>(k));
              py::array_t<double> expo(static_cast<py::ssize_t>(k));
              auto idw = id.mutable_unchecked<1>();
              auto jw = j.mutable_unchecked<1>();
              auto dw = duration.mutable_unchecked<1>();
              auto aw = page.mutable_unchecked<1>();
              auto yw = pyear.mutable_unchecked<1>();
              auto dthw = death.mutable_unchecked<1>();
              auto ew = expo.mutable_unchecked<1>();
              for (std::size_t i = 0; i < k; ++i) {
                  const auto ii = static_cast<py::ssize_t>(i);
                  idw(ii) = std::stol(rows[i].id);
                  jw(ii) = rows[i].interval;
                  dw(ii) = rows[i].duration;
                  aw(ii) = rows[i].age;
                  yw(ii) = rows[i].year;
                  dthw(ii) = rows[i].death_in_interval;
                  ew(ii) = rows[i].exposure;
              }
              out["id"] = id;
              out["j"] = j;
              out["duration"] = duration;
              out["age"] = page;
              out["year"] = pyear;
              out["death"] = death;
              out["exposure"] = expo;
              return out;
          },
          py::arg("age"), py::arg("year"), py::arg("months"), py::arg("death_cause"),
          py::arg("death_flag") = py::none());

    m.def("mean_ci", [](const py::array_t<double>& values, double level) {
        const auto v = to_double_vector(values);
        const IntervalEstimate est = mean_ci(v, level);
        py::dict d;
        d["mean"] = est.mean;
        d["half_width"] = est.half_width ? py::object(py::float_(*est.half_width)) : py::none();
        d["level"] = est.level;
        d["method"] = to_string(est.method);
        d["n"] = est.n;
        return d;
    }, py::arg("values"), py::arg("level") = 0.95);

    m.def("bootstrap_ci",
          [](const py::array_t<double>& values, const py::function& statistic,
             long resamples, double level, std::uint64_t seed) {
              const auto v = to_double_vector(values);
              const auto stat = [&statistic](std::span<const double> xs) {
                  py::array_t<double> arr(static_cast<py::ssize_t>(xs.size()));
                  auto w = arr.mutable_unchecked<1>();
                  for (std::size_t i = 0; i < xs.size(); ++i) {
                      w(static_cast<py::ssize_t>(i)) = xs[i];
                  }
                  return statistic(arr).cast<double>();
              };
              const IntervalEstimate est =
                  bootstrap_ci(v, stat, resamples, level, RandomStream{seed, 0});
              py::dict d;
              d["mean"] = est.mean;
              d["half_width"] =
                  est.half_width ? py::object(py::float_(*est.half_width)) : py::none();
              d["level"] = est.level;
              d["method"] = to_string(est.method);
              d["n"] = est.n;
              return d;
          },
          py::arg("values"), py::arg("statistic"), py::arg("resamples") = 1000,
          py::arg("level") = 0.95, py::arg("seed") = 0);

    m.def("student_t_quantile", &student_t_quantile, py::arg("p"), py::arg("df"));
}
