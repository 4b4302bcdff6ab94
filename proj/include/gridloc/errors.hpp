#pragma once

#include <stdexcept>
#include <string>

namespace gridloc {

// Invalid configuration or parameters (CLI exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent runtime data (CLI exit code 3).
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Pose outside the spatial extent of the grid.
struct out_of_bounds : data_error {
    explicit out_of_bounds(const std::string& msg) : data_error(msg) {}
};

// File with an unrecognised magic or an unsupported version.
struct format_mismatch : data_error {
    explicit format_mismatch(const std::string& msg) : data_error(msg) {}
};

// File shorter than its header promises.
struct truncated_payload : data_error {
    explicit truncated_payload(const std::string& msg) : data_error(msg) {}
};

// Header dimensions that are zero or too large to address safely.
struct dimension_overflow : data_error {
    explicit dimension_overflow(const std::string& msg) : data_error(msg) {}
};

// Integer shift that does not fit inside the kernel half-extent. Recover by
// raising the update rate or enlarging the kernel.
struct kernel_overflow : data_error {
    kernel_overflow(int channel_, char axis_, long long shift_, int half_extent_,
                    int frame_ = -1)
        : data_error(describe(channel_, axis_, shift_, half_extent_, frame_)),
          channel(channel_),
          axis(axis_),
          shift(shift_),
          half_extent(half_extent_),
          frame(frame_) {}

    int channel;
    char axis;  // 't', 'x' or 'y'
    long long shift;
    int half_extent;
    int frame;  // -1 when not raised inside a filter loop

    static std::string describe(int channel, char axis, long long shift,
                                int half_extent, int frame) {
        std::string msg = "kernel overflow: channel " + std::to_string(channel) +
                          " axis " + std::string(1, axis) + " shift " +
                          std::to_string(shift) + " exceeds half-extent " +
                          std::to_string(half_extent) +
                          "; raise the update rate or enlarge the kernel";
        if (frame >= 0) msg += " (frame " + std::to_string(frame) + ")";
        return msg;
    }
};

}  // namespace gridloc
