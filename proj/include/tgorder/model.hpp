#pragma once

// Domain types and closed-form command time estimators.
//
// All times are milliseconds held in doubles. Byte counts are integral;
// bandwidths are bytes per millisecond.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace tgorder {

enum class Direction { HtD, DtH };

// One command per stage of a task. The enumerator order is also the
// tie-break order for commands that finish at the same instant.
enum class CommandKind { HtD = 0, DtH = 1, K = 2 };

inline constexpr int kCommandKinds = 3;

std::string_view to_string(CommandKind kind);
CommandKind command_kind_from_string(std::string_view text);

enum class TaskDominance { DominantKernel, DominantTransfer };

std::string_view to_string(TaskDominance dominance);

struct TransferParams {
    double latency_ms = 0.0;
    double bandwidth_bytes_per_ms = 1.0;

    bool operator==(const TransferParams&) const = default;
};

// Immutable description of an accelerator's copy engines. The constructor
// enforces the invariants, so every DeviceProfile in existence is valid.
class DeviceProfile {
public:
    DeviceProfile(std::string name, int dma_engines, TransferParams htd, TransferParams dth,
                  double overlap_sigma);

    const std::string& name() const { return name_; }
    int dma_engines() const { return dma_engines_; }
    const TransferParams& htd() const { return htd_; }
    const TransferParams& dth() const { return dth_; }
    const TransferParams& params(Direction direction) const {
        return direction == Direction::HtD ? htd_ : dth_;
    }
    // Rate multiplier for each transfer while both directions are active.
    // Meaningful on two-engine devices only.
    double overlap_sigma() const { return overlap_sigma_; }

    bool operator==(const DeviceProfile&) const = default;

private:
    std::string name_;
    int dma_engines_;
    TransferParams htd_;
    TransferParams dth_;
    double overlap_sigma_;
};

// Illustrative profiles shipped with the tool; they are not measurements of
// any particular card.
DeviceProfile default_one_dma_profile();
DeviceProfile default_two_dma_profile();

// Linear kernel model input: time = eta * work + gamma.
struct KernelModel {
    double work = 0.0;
    double eta = 0.0;
    double gamma = 0.0;

    bool operator==(const KernelModel&) const = default;
};

struct StageTimes {
    double htd_ms = 0.0;
    double k_ms = 0.0;
    double dth_ms = 0.0;

    double transfer_ms() const { return htd_ms + dth_ms; }
    double total_ms() const { return htd_ms + k_ms + dth_ms; }

    bool operator==(const StageTimes&) const = default;
};

// One offloadable task. Each stage is either given directly in milliseconds
// or derived from the estimators; a direct value always wins. A zero-length
// transfer stage is null and produces no command.
struct TaskSpec {
    std::string id;
    std::uint64_t htd_bytes = 0;
    std::uint64_t dth_bytes = 0;
    std::optional<KernelModel> kernel;

    std::optional<double> htd_ms;
    std::optional<double> k_ms;
    std::optional<double> dth_ms;

    static TaskSpec from_times(std::string id, double htd_ms, double k_ms, double dth_ms);

    bool operator==(const TaskSpec&) const = default;
};

// Throws InvalidArgument when a field is negative or the task has no work.
void validate(const TaskSpec& task);

// Throws UnresolvableDuration when the kernel stage has neither a direct
// time nor a kernel model.
StageTimes resolve_stages(const TaskSpec& task, const DeviceProfile& profile);

double estimate_transfer(std::uint64_t bytes, Direction direction, const DeviceProfile& profile);

double estimate_kernel(double work, double eta, double gamma);

struct KernelSample {
    double work = 0.0;
    double time_ms = 0.0;
};

struct KernelFit {
    double eta = 0.0;
    double gamma = 0.0;
    // Set when either fitted coefficient came out negative. The fit is still
    // returned; callers decide whether to trust it.
    bool negative_fit = false;
};

// Ordinary least squares. Throws InsufficientSamples unless the samples
// contain at least two distinct work sizes.
KernelFit fit_kernel_model(std::span<const KernelSample> samples);

TaskDominance classify(const StageTimes& stages);
TaskDominance classify_task(const TaskSpec& task, const DeviceProfile& profile);

}  // namespace tgorder
