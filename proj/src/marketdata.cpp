#include "tailhedge/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "tailhedge/errors.hpp"
#include "tailhedge/rng.hpp"
#include "tailhedge/threads.hpp"

namespace tailhedge {

namespace {

void check_series(const std::vector<Date>& dates, const std::vector<double>& values,
                  std::size_t min_len, bool positive, const char* what) {
    if (dates.size() != values.size())
        throw std::invalid_argument(std::string(what) + ": dates and values differ in length");
    if (values.size() < min_len)
        throw DataError(std::string(what) + ": need at least " + std::to_string(min_len) +
                        " observations, got " + std::to_string(values.size()));
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i]))
            throw DataError(std::string(what) + ": dates not strictly increasing at " +
                            dates[i].to_string());
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite value");
        if (positive && !(v > 0.0))
            throw DataError(std::string(what) + ": non-positive value " + std::to_string(v));
        if (!positive && !(v > -1.0))
            throw DataError(std::string(what) + ": return not greater than -1");
    }
}

}  // namespace

PriceSeries::PriceSeries(std::vector<Date> d, std::vector<double> c, std::string id)
    : dates(std::move(d)), closes(std::move(c)), asset_id(std::move(id)) {
    check_series(dates, closes, 2, true, "PriceSeries");
}

ReturnSeries::ReturnSeries(std::vector<Date> d, std::vector<double> r, std::string id)
    : dates(std::move(d)), returns(std::move(r)), asset_id(std::move(id)) {
    check_series(dates, returns, 1, false, "ReturnSeries");
}

std::string_view to_string(PathModel m) { return m == PathModel::gbm ? "gbm" : "heston"; }

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

double parse_close(std::string_view field, const std::string& where) {
    double value = 0.0;
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || p != field.data() + field.size() || !std::isfinite(value))
        throw DataError(where + ": bad close value '" + std::string(field) + "'");
    return value;
}

}  // namespace

PriceSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    if (strip_cr(line) != "date,close")
        throw DataError(path.string() + ": expected header 'date,close', got '" + strip_cr(line) +
                        "'");
    struct Row {
        Date date;
        double close;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::string where = path.string() + " line " + std::to_string(lineno);
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw DataError(where + ": expected exactly two fields");
        Date date{};
        try {
            date = Date::parse(std::string_view(line).substr(0, comma));
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
        const double close = parse_close(std::string_view(line).substr(comma + 1), where);
        if (!(close > 0.0)) throw DataError(where + ": non-positive close");
        rows.push_back({date, close});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date)
            throw DataError(path.string() + ": duplicate date " + rows[i].date.to_string());
    if (rows.size() < 2) throw DataError(path.string() + ": need at least 2 rows");
    std::vector<Date> dates;
    std::vector<double> closes;
    dates.reserve(rows.size());
    closes.reserve(rows.size());
    for (const auto& r : rows) {
        dates.push_back(r.date);
        closes.push_back(r.close);
    }
    return {std::move(dates), std::move(closes), path.stem().string()};
}

void write_csv(const PriceSeries& prices, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "date,close\n";
    char buf[48];
    for (std::size_t i = 0; i < prices.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", prices.closes[i]);
        out << prices.dates[i].to_string() << ',' << buf << '\n';
    }
}

ReturnSeries to_returns(const PriceSeries& prices) {
    check_series(prices.dates, prices.closes, 2, true, "to_returns input");
    std::vector<Date> dates(prices.dates.begin() + 1, prices.dates.end());
    std::vector<double> rets(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i)
        rets[i] = prices.closes[i + 1] / prices.closes[i] - 1.0;
    return {std::move(dates), std::move(rets), prices.asset_id};
}

namespace {

std::pair<std::size_t, std::size_t> window_bounds(const std::vector<Date>& dates, Date start,
                                                  Date end, const char* what) {
    if (start > end) throw std::invalid_argument(std::string(what) + ": start after end");
    const auto lo = std::lower_bound(dates.begin(), dates.end(), start);
    const auto hi = std::upper_bound(dates.begin(), dates.end(), end);
    if (lo >= hi)
        throw DataError(std::string(what) + ": no observations in [" + start.to_string() + ", " +
                        end.to_string() + "]");
    return {static_cast<std::size_t>(lo - dates.begin()),
            static_cast<std::size_t>(hi - dates.begin())};
}

}  // namespace

ReturnSeries window(const ReturnSeries& series, Date start, Date end) {
    const auto [lo, hi] = window_bounds(series.dates, start, end, "window");
    return {{series.dates.begin() + static_cast<std::ptrdiff_t>(lo),
             series.dates.begin() + static_cast<std::ptrdiff_t>(hi)},
            {series.returns.begin() + static_cast<std::ptrdiff_t>(lo),
             series.returns.begin() + static_cast<std::ptrdiff_t>(hi)},
            series.asset_id};
}

PriceSeries window_prices(const PriceSeries& series, Date start, Date end) {
    const auto [lo, hi] = window_bounds(series.dates, start, end, "window_prices");
    return {{series.dates.begin() + static_cast<std::ptrdiff_t>(lo),
             series.dates.begin() + static_cast<std::ptrdiff_t>(hi)},
            {series.closes.begin() + static_cast<std::ptrdiff_t>(lo),
             series.closes.begin() + static_cast<std::ptrdiff_t>(hi)},
            series.asset_id};
}

void SyntheticSpec::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SyntheticSpec: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("SyntheticSpec: steps must be >= 1");
    if (!(s0 > 0.0)) throw std::invalid_argument("SyntheticSpec: s0 must be > 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("SyntheticSpec: mu must be finite");
    if (model == PathModel::gbm) {
        if (!(sigma >= 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("SyntheticSpec: sigma must be >= 0");
    } else {
        if (!(kappa >= 0.0) || !(theta >= 0.0) || !(nu >= 0.0) || !(v0 >= 0.0))
            throw std::invalid_argument("SyntheticSpec: heston parameters must be >= 0");
        if (!(rho >= -1.0 && rho <= 1.0))
            throw std::invalid_argument("SyntheticSpec: rho must be in [-1, 1]");
    }
}

SyntheticSpec SyntheticSpec::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synthetic spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("synthetic spec: expected a JSON object");
    static const std::vector<std::string> known{"model", "mu",    "sigma", "kappa", "theta",
                                               "nu",    "rho",   "v0",    "steps", "dt",
                                               "seed",  "s0",    "start_date"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw DataError("synthetic spec: unknown key '" + key + "'");
    SyntheticSpec spec;
    try {
        if (!j.contains("model")) throw DataError("synthetic spec: missing 'model'");
        const auto model = j.at("model").get<std::string>();
        if (model == "gbm")
            spec.model = PathModel::gbm;
        else if (model == "heston")
            spec.model = PathModel::heston;
        else
            throw DataError("synthetic spec: model must be 'gbm' or 'heston', got '" + model + "'");
        if (j.contains("mu")) spec.mu = j.at("mu").get<double>();
        if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
        if (j.contains("kappa")) spec.kappa = j.at("kappa").get<double>();
        if (j.contains("theta")) spec.theta = j.at("theta").get<double>();
        if (j.contains("nu")) spec.nu = j.at("nu").get<double>();
        if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
        if (j.contains("v0")) spec.v0 = j.at("v0").get<double>();
        if (j.contains("s0")) spec.s0 = j.at("s0").get<double>();
        if (j.contains("steps")) spec.steps = j.at("steps").get<std::size_t>();
        if (j.contains("dt")) spec.dt = j.at("dt").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("start_date")) spec.start_date = Date::parse(j.at("start_date").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synthetic spec: bad field type: ") + e.what());
    }
    spec.validate();
    return spec;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::vector<SimulatedPath> simulate_paths_detail(const SyntheticSpec& spec, std::size_t n_paths) {
    spec.validate();
    if (n_paths < 1) throw std::invalid_argument("simulate_paths: n_paths must be >= 1");
    const auto dates = weekday_sequence(spec.start_date, spec.steps + 1);
    const std::string id{to_string(spec.model)};
    std::vector<SimulatedPath> out(n_paths);
    parallel_for_slots(n_paths, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            Rng rng = stream_rng(spec.seed, p);
            std::vector<double> closes;
            closes.reserve(spec.steps + 1);
            closes.push_back(spec.s0);
            std::vector<double> variance;
            if (spec.model == PathModel::gbm) {
                const double drift = (spec.mu - 0.5 * spec.sigma * spec.sigma) * spec.dt;
                const double vol = spec.sigma * std::sqrt(spec.dt);
                for (std::size_t k = 0; k < spec.steps; ++k)
                    closes.push_back(closes.back() * std::exp(drift + vol * rng.normal()));
            } else {
                variance.reserve(spec.steps);
                double v = spec.v0;
                for (std::size_t k = 0; k < spec.steps; ++k) {
                    const double vp = std::max(v, 0.0);
                    variance.push_back(vp);
                    const double z1 = rng.normal();
                    const double z2 =
                        spec.rho * z1 + std::sqrt(1.0 - spec.rho * spec.rho) * rng.normal();
                    closes.push_back(closes.back() *
                                     std::exp((spec.mu - 0.5 * vp) * spec.dt +
                                              std::sqrt(vp * spec.dt) * z1));
                    v += spec.kappa * (spec.theta - vp) * spec.dt +
                         spec.nu * std::sqrt(vp * spec.dt) * z2;
                }
            }
            out[p] = {PriceSeries(dates, std::move(closes), id), std::move(variance)};
        }
    });
    return out;
}

std::vector<PriceSeries> simulate_paths(const SyntheticSpec& spec, std::size_t n_paths) {
    auto detail = simulate_paths_detail(spec, n_paths);
    std::vector<PriceSeries> out;
    out.reserve(detail.size());
    for (auto& d : detail) out.push_back(std::move(d.prices));
    return out;
}

}  // namespace tailhedge
