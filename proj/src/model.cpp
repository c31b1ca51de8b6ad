#include "tgorder/model.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "tgorder/error.hpp"

namespace tgorder {

std::string_view to_string(CommandKind kind) {
    switch (kind) {
        case CommandKind::HtD: return "HtD";
        case CommandKind::K: return "K";
        case CommandKind::DtH: return "DtH";
    }
    return "?";
}

CommandKind command_kind_from_string(std::string_view text) {
    if (text == "HtD") return CommandKind::HtD;
    if (text == "K") return CommandKind::K;
    if (text == "DtH") return CommandKind::DtH;
    throw ParseError("unknown command kind '" + std::string(text) + "'");
}

std::string_view to_string(TaskDominance dominance) {
    return dominance == TaskDominance::DominantKernel ? "DK" : "DT";
}

DeviceProfile::DeviceProfile(std::string name, int dma_engines, TransferParams htd,
                             TransferParams dth, double overlap_sigma)
    : name_(std::move(name)),
      dma_engines_(dma_engines),
      htd_(htd),
      dth_(dth),
      overlap_sigma_(overlap_sigma) {
    if (dma_engines_ != 1 && dma_engines_ != 2) {
        throw InvalidArgument("dma_engines must be 1 or 2");
    }
    for (const TransferParams* p : {&htd_, &dth_}) {
        if (!(p->bandwidth_bytes_per_ms > 0.0) || !std::isfinite(p->bandwidth_bytes_per_ms)) {
            throw InvalidArgument("transfer bandwidth must be positive");
        }
        if (!(p->latency_ms >= 0.0) || !std::isfinite(p->latency_ms)) {
            throw InvalidArgument("transfer latency must be non-negative");
        }
    }
    if (!(overlap_sigma_ > 0.0 && overlap_sigma_ <= 1.0)) {
        throw InvalidArgument("overlap_sigma must lie in (0, 1]");
    }
}

// PCIe 3.0 x16 ballpark: ~12 GB/s per direction with two engines, a shared
// and somewhat slower link on the single-engine card.
DeviceProfile default_one_dma_profile() {
    return DeviceProfile("default-1dma", 1, {0.01, 6.0e6}, {0.01, 6.0e6}, 1.0);
}

DeviceProfile default_two_dma_profile() {
    return DeviceProfile("default-2dma", 2, {0.01, 12.0e6}, {0.01, 12.0e6}, 0.5);
}

TaskSpec TaskSpec::from_times(std::string id, double htd_ms, double k_ms, double dth_ms) {
    TaskSpec task;
    task.id = std::move(id);
    task.htd_ms = htd_ms;
    task.k_ms = k_ms;
    task.dth_ms = dth_ms;
    return task;
}

namespace {

void require_non_negative(double value, const char* field, const std::string& id) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw InvalidArgument("task '" + id + "': " + field + " must be a finite value >= 0");
    }
}

}  // namespace

void validate(const TaskSpec& task) {
    if (task.kernel) {
        require_non_negative(task.kernel->work, "work", task.id);
        require_non_negative(task.kernel->eta, "eta", task.id);
        require_non_negative(task.kernel->gamma, "gamma", task.id);
    }
    if (task.htd_ms) require_non_negative(*task.htd_ms, "htd_ms", task.id);
    if (task.k_ms) require_non_negative(*task.k_ms, "k_ms", task.id);
    if (task.dth_ms) require_non_negative(*task.dth_ms, "dth_ms", task.id);
}

StageTimes resolve_stages(const TaskSpec& task, const DeviceProfile& profile) {
    validate(task);
    StageTimes stages;
    stages.htd_ms = task.htd_ms ? *task.htd_ms
                                : estimate_transfer(task.htd_bytes, Direction::HtD, profile);
    stages.dth_ms = task.dth_ms ? *task.dth_ms
                                : estimate_transfer(task.dth_bytes, Direction::DtH, profile);
    if (task.k_ms) {
        stages.k_ms = *task.k_ms;
    } else if (task.kernel) {
        stages.k_ms = estimate_kernel(task.kernel->work, task.kernel->eta, task.kernel->gamma);
    } else {
        throw UnresolvableDuration("task '" + task.id +
                                   "' has neither k_ms nor a kernel model (work, eta, gamma)");
    }
    if (stages.transfer_ms() <= 0.0 && stages.k_ms <= 0.0) {
        throw InvalidArgument("task '" + task.id + "' has no work in any stage");
    }
    return stages;
}

double estimate_transfer(std::uint64_t bytes, Direction direction, const DeviceProfile& profile) {
    if (bytes == 0) return 0.0;
    const TransferParams& p = profile.params(direction);
    return p.latency_ms + static_cast<double>(bytes) / p.bandwidth_bytes_per_ms;
}

double estimate_kernel(double work, double eta, double gamma) { return eta * work + gamma; }

KernelFit fit_kernel_model(std::span<const KernelSample> samples) {
    std::set<double> distinct;
    for (const KernelSample& s : samples) distinct.insert(s.work);
    if (samples.size() < 2 || distinct.size() < 2) {
        throw InsufficientSamples("kernel fit needs samples at two or more distinct work sizes");
    }

    const double n = static_cast<double>(samples.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const KernelSample& s : samples) {
        mean_x += s.work;
        mean_y += s.time_ms;
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    for (const KernelSample& s : samples) {
        const double dx = s.work - mean_x;
        sxx += dx * dx;
        sxy += dx * (s.time_ms - mean_y);
    }

    KernelFit fit;
    fit.eta = sxy / sxx;
    fit.gamma = mean_y - fit.eta * mean_x;
    fit.negative_fit = fit.eta < 0.0 || fit.gamma < 0.0;
    return fit;
}

TaskDominance classify(const StageTimes& stages) {
    return stages.transfer_ms() > stages.k_ms ? TaskDominance::DominantTransfer
                                              : TaskDominance::DominantKernel;
}

TaskDominance classify_task(const TaskSpec& task, const DeviceProfile& profile) {
    return classify(resolve_stages(task, profile));
}

}  // namespace tgorder
