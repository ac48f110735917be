// src/backend.cc

// Copyright 2026  The voicemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "voicemix/backend.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <fcntl.h>

#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "voicemix/errors.hpp"

extern char** environ;

namespace voicemix {

namespace {

namespace fs = std::filesystem;

constexpr const char* kPlaceholders[] = {"{op}", "{1}", "{2}", "{3}"};
constexpr std::size_t kMaxStderr = 4000;

// Whitespace split; double quotes group, backslash escapes inside quotes.
std::vector<std::string> split_command(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else if (c == '\\' && i + 1 < text.size()) {
        cur += text[++i];
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = in_token = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quoted) throw Error(ErrorKind::kInvalidArgument, "unbalanced quote in backend command");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  if (text.size() > kMaxStderr) text = text.substr(text.size() - kMaxStderr);
  return text;
}

// Runs argv with stdout discarded and stderr captured. Returns only on exit
// status 0.
void run(const std::vector<std::string>& argv, const fs::path& stderr_path) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 2, stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    fs::remove(stderr_path);
    throw Error(ErrorKind::kBackendLaunchFailure,
                argv[0] + ": " + std::strerror(rc));
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) {
      throw Error(ErrorKind::kBackendLaunchFailure, argv[0] + ": waitpid failed");
    }
  }
  const std::string err = read_text(stderr_path);
  fs::remove(stderr_path);
  if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return;
  if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
    throw Error(ErrorKind::kBackendLaunchFailure, argv[0] + ": " + err);
  }
  const std::string how = WIFEXITED(status)
                              ? "exit " + std::to_string(WEXITSTATUS(status))
                              : "signal " + std::to_string(WTERMSIG(status));
  throw Error(ErrorKind::kBackendNonZeroExit, argv[0] + " (" + how + "): " + err);
}

fs::path stderr_file(const fs::path& beside) {
  fs::path p = beside;
  p += ".stderr";
  return p;
}

}  // namespace

CodecBackend CodecBackend::external(const std::string& command_template) {
  std::string t = command_template;
  if (split_command(t).empty()) {
    throw Error(ErrorKind::kInvalidArgument, "empty backend command");
  }
  int present = 0;
  for (const char* p : kPlaceholders) present += t.find(p) != std::string::npos;
  if (present == 0) {
    t += " {op} {1} {2} {3}";
  } else if (present != 4) {
    throw Error(ErrorKind::kInvalidArgument,
                "backend command must use all of {op} {1} {2} {3}: " + t);
  }
  CodecBackend b;
  b.kind_ = Kind::kExternal;
  b.template_ = std::move(t);
  return b;
}

std::string CodecBackend::spec() const {
  return is_reference() ? std::string("reference") : template_;
}

CodecBackend CodecBackend::parse(const std::string& spec) {
  if (spec.empty() || spec == "reference") return reference();
  return external(spec);
}

std::vector<std::string> CodecBackend::expand(const std::string& op,
                                              const std::string& a1,
                                              const std::string& a2,
                                              const std::string& a3) const {
  if (is_reference()) {
    throw Error(ErrorKind::kInvalidArgument, "reference backend has no command");
  }
  auto argv = split_command(template_);
  for (auto& arg : argv) {
    // Substitute in one pass per token so a path containing "{1}" is inert.
    std::string out;
    for (std::size_t i = 0; i < arg.size();) {
      const std::pair<const char*, const std::string*> subs[] = {
          {"{op}", &op}, {"{1}", &a1}, {"{2}", &a2}, {"{3}", &a3}};
      bool hit = false;
      for (const auto& [key, value] : subs) {
        const std::size_t n = std::strlen(key);
        if (arg.compare(i, n, key) == 0) {
          out += *value;
          i += n;
          hit = true;
          break;
        }
      }
      if (!hit) out += arg[i++];
    }
    arg = std::move(out);
  }
  return argv;
}

TimbreVector external_encode(const CodecBackend& backend, const fs::path& in_wav,
                             const fs::path& content_out, const fs::path& timbre_out) {
  run(backend.expand("encode", in_wav.string(), content_out.string(),
                     timbre_out.string()),
      stderr_file(timbre_out));
  try {
    return load_timbre(timbre_out);
  } catch (const Error& e) {
    throw Error(ErrorKind::kBadTimbreFromBackend, e.what());
  }
}

AudioClip external_decode(const CodecBackend& backend, const fs::path& content_in,
                          const fs::path& timbre_in, const fs::path& out_wav) {
  run(backend.expand("decode", content_in.string(), timbre_in.string(),
                     out_wav.string()),
      stderr_file(out_wav));
  AudioClip clip = load_canonical(out_wav);
  normalize_on_overflow(clip);
  return clip;
}

BackendEncoding backend_encode(const CodecBackend& backend, const AudioClip& clip,
                               const fs::path& scratch) {
  if (backend.is_reference()) {
    EncodedUtterance enc = encode(clip);
    return {std::move(enc.content), enc.timbre};
  }
  const fs::path wav = scratch / "encode_in.wav";
  const fs::path content = scratch / "content.bin";
  save_wav(clip, wav);
  TimbreVector timbre = external_encode(backend, wav, content, scratch / "source.timb");
  return {content, timbre};
}

AudioClip backend_decode(const CodecBackend& backend, const ContentHandle& content,
                         const TimbreVector& timbre, const fs::path& scratch) {
  if (backend.is_reference()) {
    const auto* code = std::get_if<ContentCode>(&content);
    if (code == nullptr) {
      throw Error(ErrorKind::kInvalidArgument,
                  "reference backend needs an in-memory content code");
    }
    return decode(*code, timbre);
  }
  const auto* file = std::get_if<fs::path>(&content);
  if (file == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "external backend needs a content file");
  }
  const fs::path timb = scratch / "mixed.timb";
  save_timbre(timbre, timb);
  return external_decode(backend, *file, timb, scratch / "decode_out.wav");
}

}  // namespace voicemix
