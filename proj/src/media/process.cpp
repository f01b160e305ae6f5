#include <ivs/media/process.hpp>

#include <ivs/error.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace ivs::media {

namespace {

struct Pipe
{
    int fds[2] = {-1, -1};

    Pipe()
    {
        if (::pipe2(fds, O_CLOEXEC) != 0)
            throw Error(ErrorCode::Io, std::string("pipe failed: ") + std::strerror(errno));
    }
    ~Pipe()
    {
        closeRead();
        closeWrite();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    void closeRead()
    {
        if (fds[0] >= 0)
            ::close(fds[0]);
        fds[0] = -1;
    }
    void closeWrite()
    {
        if (fds[1] >= 0)
            ::close(fds[1]);
        fds[1] = -1;
    }
};

}  // namespace

ProcessResult runProcess(const std::vector<std::string>& argv, std::string_view input)
{
    if (argv.empty())
        throw Error(ErrorCode::InvalidArgument, "empty command");

    Pipe inPipe, outPipe, errPipe;

    std::vector<char*> cargv;
    for (const auto& a : argv)
        cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0)
        throw Error(ErrorCode::Io, std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0)
    {
        ::dup2(inPipe.fds[0], STDIN_FILENO);
        ::dup2(outPipe.fds[1], STDOUT_FILENO);
        ::dup2(errPipe.fds[1], STDERR_FILENO);
        ::execvp(cargv[0], cargv.data());
        const std::string msg = std::string("exec failed: ") + argv[0] + ": " + std::strerror(errno) + "\n";
        [[maybe_unused]] auto n = ::write(STDERR_FILENO, msg.data(), msg.size());
        ::_exit(127);
    }

    inPipe.closeRead();
    outPipe.closeWrite();
    errPipe.closeWrite();

    // a child that exits without draining stdin must not kill us
    static std::once_flag sigpipeOnce;
    std::call_once(sigpipeOnce, [] { std::signal(SIGPIPE, SIG_IGN); });

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty())
        inPipe.closeWrite();
    else
        ::fcntl(inPipe.fds[1], F_SETFL, O_NONBLOCK);

    char buffer[65536];
    bool outOpen = true, errOpen = true;
    while (outOpen || errOpen || inPipe.fds[1] >= 0)
    {
        std::vector<pollfd> pfds;
        if (outOpen)
            pfds.push_back({outPipe.fds[0], POLLIN, 0});
        if (errOpen)
            pfds.push_back({errPipe.fds[0], POLLIN, 0});
        if (inPipe.fds[1] >= 0)
            pfds.push_back({inPipe.fds[1], POLLOUT, 0});
        if (::poll(pfds.data(), pfds.size(), -1) < 0)
        {
            if (errno == EINTR)
                continue;
            break;
        }
        for (const auto& p : pfds)
        {
            if (p.revents == 0)
                continue;
            if (p.fd == inPipe.fds[1])
            {
                if (p.revents & (POLLERR | POLLHUP))
                {
                    inPipe.closeWrite();
                    continue;
                }
                const ssize_t n = ::write(p.fd, input.data() + written, input.size() - written);
                if (n > 0)
                    written += static_cast<std::size_t>(n);
                else if (n < 0 && errno != EAGAIN && errno != EINTR)
                    inPipe.closeWrite();
                if (written >= input.size())
                    inPipe.closeWrite();
                continue;
            }
            const ssize_t n = ::read(p.fd, buffer, sizeof(buffer));
            std::string& sink = p.fd == outPipe.fds[0] ? result.out : result.err;
            if (n > 0)
                sink.append(buffer, static_cast<std::size_t>(n));
            else if (n == 0 || (errno != EAGAIN && errno != EINTR))
            {
                if (p.fd == outPipe.fds[0])
                    outOpen = false;
                else
                    errOpen = false;
            }
        }
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR)
    {
    }

    if (WIFEXITED(status))
        result.exitCode = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exitCode = 128 + WTERMSIG(status);
    return result;
}

std::vector<std::string> splitCommandLine(const std::string& command)
{
    std::vector<std::string> parts;
    std::string current;
    bool inToken = false;
    char quote = 0;
    for (char c : command)
    {
        if (quote)
        {
            if (c == quote)
                quote = 0;
            else
                current += c;
            continue;
        }
        if (c == '\'' || c == '"')
        {
            quote = c;
            inToken = true;
        }
        else if (c == ' ' || c == '\t' || c == '\n')
        {
            if (inToken)
                parts.push_back(std::move(current));
            current.clear();
            inToken = false;
        }
        else
        {
            current += c;
            inToken = true;
        }
    }
    if (quote)
        throw Error(ErrorCode::InvalidArgument, "unterminated quote in command: " + command);
    if (inToken)
        parts.push_back(std::move(current));
    return parts;
}

}  // namespace ivs::media
