#include "fast/sr.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cctype>
#include <cerrno>
#include <cstring>

#include "fast/sampling.hpp"

extern char** environ;

namespace fast {
namespace {

struct Pipe {
    int read = -1;
    int write = -1;

    Pipe() {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0) throw PluginError(std::string("pipe() failed: ") + std::strerror(errno));
        read = fds[0];
        write = fds[1];
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    void close_read() {
        if (read >= 0) ::close(read);
        read = -1;
    }
    void close_write() {
        if (write >= 0) ::close(write);
        write = -1;
    }
};

struct ProcessResult {
    int status = 0;
    std::string out;
    std::string err;
};

// Runs `/bin/sh -c command`, streaming `input` to stdin while draining stdout and stderr.
ProcessResult run_process(const std::string& command, const std::string& input) {
    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read, STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write, STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write, STDERR_FILENO);

    const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
    pid_t pid = 0;
    const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw PluginError("failed to spawn SR plugin", std::strerror(rc));

    in.close_read();
    out.close_write();
    err.close_write();

    // A child that exits early must not kill us with SIGPIPE.
    struct sigaction ignore {}, previous {};
    ignore.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &ignore, &previous);

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty()) in.close_write();
    std::array<char, 65536> buf;
    while (out.read >= 0 || err.read >= 0) {
        std::array<pollfd, 3> fds{};
        nfds_t n = 0;
        if (in.write >= 0) fds[n++] = {in.write, POLLOUT, 0};
        if (out.read >= 0) fds[n++] = {out.read, POLLIN, 0};
        if (err.read >= 0) fds[n++] = {err.read, POLLIN, 0};
        if (::poll(fds.data(), n, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (nfds_t i = 0; i < n; ++i) {
            if (fds[i].revents == 0) continue;
            if (fds[i].fd == in.write) {
                const ssize_t k = ::write(in.write, input.data() + written, input.size() - written);
                if (k > 0) written += static_cast<std::size_t>(k);
                if (k < 0 || written == input.size()) in.close_write();
            } else {
                const bool is_out = fds[i].fd == out.read;
                const ssize_t k = ::read(fds[i].fd, buf.data(), buf.size());
                if (k > 0) {
                    (is_out ? result.out : result.err).append(buf.data(), static_cast<std::size_t>(k));
                } else if (k == 0 || errno != EINTR) {
                    (is_out ? out : err).close_read();
                }
            }
        }
    }
    in.close_write();
    sigaction(SIGPIPE, &previous, nullptr);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    result.status = status;
    return result;
}

PicturePlane run_external(const SrOperator& op, const PicturePlane& frame) {
    const std::string command = op.command + " --scale " + std::to_string(op.alpha);
    const ProcessResult r = run_process(command, encode_pgm(frame));
    if (!WIFEXITED(r.status) || WEXITSTATUS(r.status) != 0) {
        const std::string how = WIFEXITED(r.status) ? "exit code " + std::to_string(WEXITSTATUS(r.status))
                                                    : "abnormal termination";
        throw PluginError("SR plugin '" + op.command + "' failed with " + how, r.err);
    }
    PicturePlane result;
    try {
        result = decode_pgm(r.out);
    } catch (const FormatError& e) {
        throw PluginError(std::string("SR plugin produced malformed PGM: ") + e.what(), r.err);
    }
    if (result.rows() != frame.rows() * op.alpha || result.cols() != frame.cols() * op.alpha) {
        throw PluginError("SR plugin returned " + std::to_string(result.cols()) + "x" + std::to_string(result.rows()) +
                              ", expected " + std::to_string(frame.cols() * op.alpha) + "x" +
                              std::to_string(frame.rows() * op.alpha),
                          r.err);
    }
    return result;
}

}  // namespace

SrOperator SrOperator::parse(std::string_view spec, int alpha) {
    if (!valid_scale(alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    SrOperator op;
    op.alpha = alpha;
    if (spec == "bicubic") {
        op.kind = SrKind::Bicubic;
    } else if (spec == "ibp") {
        op.kind = SrKind::Ibp;
    } else if (spec.starts_with("external:")) {
        op.kind = SrKind::External;
        op.command = std::string(spec.substr(9));
        if (op.command.empty()) throw ParameterError("external SR operator needs a command");
    } else {
        throw ParameterError("unknown SR operator '" + std::string(spec) + "'");
    }
    return op;
}

std::string SrOperator::describe() const {
    switch (kind) {
        case SrKind::Bicubic: return "bicubic";
        case SrKind::Ibp: return "ibp";
        case SrKind::External: return "external:" + command;
    }
    return "?";
}

PicturePlane iterative_back_projection(const PicturePlane& frame, int alpha, const IbpConfig& cfg) {
    const RealPlane observed = frame.cast<double>();
    RealPlane current = cubic_upsample_real(observed, alpha);
    for (int k = 0; k < cfg.iterations; ++k) {
        const RealPlane err = box_downsample_real(current, alpha) - observed;
        current -= cfg.step * cubic_upsample_real(err, alpha);
    }
    return quantize<std::uint8_t>(current);
}

PicturePlane apply_sr(const SrOperator& op, const PicturePlane& frame) {
    if (!valid_scale(op.alpha)) throw ParameterError("alpha must be 2, 3 or 4");
    if (frame.size() == 0) throw ParameterError("cannot super-resolve an empty frame");
    switch (op.kind) {
        case SrKind::Bicubic: return bicubic_upsample(frame, op.alpha);
        case SrKind::Ibp: return iterative_back_projection(frame, op.alpha);
        case SrKind::External: return run_external(op, frame);
    }
    throw ParameterError("unknown SR operator kind");
}

std::string encode_pgm(const PicturePlane& plane) {
    std::string out = "P5\n" + std::to_string(plane.cols()) + " " + std::to_string(plane.rows()) + "\n255\n";
    out.append(reinterpret_cast<const char*>(plane.data()), static_cast<std::size_t>(plane.size()));
    return out;
}

PicturePlane decode_pgm(std::string_view bytes) {
    std::size_t pos = 0;
    auto skip_space_and_comments = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&](const char* what) {
        skip_space_and_comments();
        const std::size_t at = pos;
        long long v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > (1 << 24)) throw FormatError(std::string("PGM ") + what + " too large", at);
        }
        if (pos == at) throw FormatError(std::string("PGM ") + what + " missing", at);
        return static_cast<int>(v);
    };

    if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw FormatError("not a binary PGM (P5)", 0);
    pos = 2;
    const int w = read_int("width");
    const int h = read_int("height");
    const std::size_t maxval_at = pos;
    const int maxval = read_int("maxval");
    if (maxval != 255) throw FormatError("only 8-bit PGM (maxval 255) is supported", maxval_at);
    if (w <= 0 || h <= 0) throw FormatError("PGM dimensions must be positive", maxval_at);
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        throw FormatError("PGM header must end with a single whitespace byte", pos);
    }
    ++pos;
    const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < need) throw FormatError("truncated PGM payload", bytes.size());
    PicturePlane plane(h, w);
    std::memcpy(plane.data(), bytes.data() + pos, need);
    return plane;
}

}  // namespace fast
