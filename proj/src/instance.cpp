#include "lbai/instance.hpp"

#include <sstream>
#include <stdexcept>

namespace lbai {

namespace {

void check_shape(std::size_t arms, Round horizon) {
    if (arms < 1) throw std::invalid_argument("instance: need at least one arm");
    if (horizon < 1) throw std::invalid_argument("instance: need a positive horizon");
}

}  // namespace

BanditInstance BanditInstance::dense(std::size_t arms, Round horizon, std::vector<double> row_major,
                                     std::string label) {
    check_shape(arms, horizon);
    if (row_major.size() != arms * static_cast<std::size_t>(horizon))
        throw std::invalid_argument("instance: value count does not match K x T");
    for (std::size_t i = 0; i < row_major.size(); ++i) {
        const double v = row_major[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            std::ostringstream msg;
            msg << "instance: reward " << v << " out of [0,1] at arm " << i / horizon << ", round "
                << i % horizon + 1;
            throw std::out_of_range(msg.str());
        }
    }
    BanditInstance inst;
    inst.arms_ = arms;
    inst.horizon_ = horizon;
    inst.label_ = std::move(label);
    inst.dense_holder_ = std::make_shared<const std::vector<double>>(std::move(row_major));
    inst.dense_ = *inst.dense_holder_;
    return inst;
}

BanditInstance BanditInstance::from_rows(const std::vector<std::vector<double>>& rows,
                                         std::string label) {
    if (rows.empty()) throw std::invalid_argument("instance: need at least one arm");
    const std::size_t horizon = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * horizon);
    for (const auto& row : rows) {
        if (row.size() != horizon) throw std::invalid_argument("instance: ragged reward matrix");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return dense(rows.size(), static_cast<Round>(horizon), std::move(flat), std::move(label));
}

BanditInstance BanditInstance::generated(std::size_t arms, Round horizon,
                                         std::shared_ptr<const RewardSource> source,
                                         std::string label, std::optional<GeneratorSpec> spec) {
    check_shape(arms, horizon);
    if (!source) throw std::invalid_argument("instance: null reward source");
    const std::uint64_t cells = static_cast<std::uint64_t>(arms) * static_cast<std::uint64_t>(horizon);
    if (cells <= kDenseLimit) {
        std::vector<double> flat(cells);
        for (std::size_t a = 0; a < arms; ++a)
            for (Round t = 1; t <= horizon; ++t)
                flat[a * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t - 1)] =
                    source->at(a, t);
        auto inst = dense(arms, horizon, std::move(flat), std::move(label));
        inst.spec_ = std::move(spec);
        return inst;
    }
    BanditInstance inst;
    inst.arms_ = arms;
    inst.horizon_ = horizon;
    inst.label_ = std::move(label);
    inst.source_ = std::move(source);
    inst.spec_ = std::move(spec);
    return inst;
}

double BanditInstance::reward(std::size_t arm, Round round) const {
    if (arm >= arms_) throw std::out_of_range("instance: arm index out of range");
    if (round < 1 || round > horizon_) throw std::out_of_range("instance: round out of range");
    return at_unchecked(arm, round);
}

double BanditInstance::window_sum(std::size_t arm, Round t0, Round w) const {
    if (arm >= arms_) throw std::out_of_range("instance: arm index out of range");
    if (w < 1 || t0 < 1 || t0 + w - 1 > horizon_)
        throw std::out_of_range("instance: window [" + std::to_string(t0) + ", " +
                                std::to_string(t0 + w - 1) + "] outside horizon");
    double sum = 0.0;
    for (Round t = t0; t < t0 + w; ++t) sum += at_unchecked(arm, t);
    return sum;
}

void BanditInstance::read_row(std::size_t arm, Round first, std::span<double> out) const {
    const auto len = static_cast<Round>(out.size());
    if (arm >= arms_ || first < 1 || first + len - 1 > horizon_)
        throw std::out_of_range("instance: row slice out of range");
    for (Round i = 0; i < len; ++i) out[static_cast<std::size_t>(i)] = at_unchecked(arm, first + i);
}

BanditInstance make_dense(const std::vector<std::vector<double>>& values) {
    return BanditInstance::from_rows(values);
}

double window_average(const BanditInstance& instance, std::size_t arm, Round t0, Round w) {
    return instance.window_sum(arm, t0, w) / static_cast<double>(w);
}

}  // namespace lbai
