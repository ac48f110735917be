// include/voicemix/backend.hpp

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

#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "voicemix/audio.hpp"
#include "voicemix/codec.hpp"

namespace voicemix {

/// Either the in-process reference codec or an external program driven
/// through files:
///
///   <cmd> encode <in.wav> <content.out> <timbre.out>
///   <cmd> decode <content.in> <timbre.in> <out.wav>
///
/// The template uses {op}, {1}, {2} and {3}; a template with none of them
/// gets " {op} {1} {2} {3}" appended.
class CodecBackend {
 public:
  enum class Kind { kReference, kExternal };

  static CodecBackend reference() { return CodecBackend(); }

  /// Throws kInvalidArgument if the template is empty or names only some of
  /// the placeholders.
  static CodecBackend external(const std::string& command_template);

  /// "reference" or the external template; `parse` accepts the same strings.
  std::string spec() const;
  static CodecBackend parse(const std::string& spec);

  Kind kind() const { return kind_; }
  bool is_reference() const { return kind_ == Kind::kReference; }
  const std::string& command_template() const { return template_; }

  /// argv for one call after placeholder substitution.
  std::vector<std::string> expand(const std::string& op, const std::string& a1,
                                  const std::string& a2,
                                  const std::string& a3) const;

 private:
  Kind kind_ = Kind::kReference;
  std::string template_;
};

/// Content as seen by the pipeline: a ContentCode for the reference codec or
/// an opaque file owned by an external backend.
using ContentHandle = std::variant<ContentCode, std::filesystem::path>;

struct BackendEncoding {
  ContentHandle content;
  TimbreVector timbre;
};

/// Runs the external encoder. Throws kBackendLaunchFailure,
/// kBackendNonZeroExit (message carries the captured stderr) or
/// kBadTimbreFromBackend.
TimbreVector external_encode(const CodecBackend& backend,
                             const std::filesystem::path& in_wav,
                             const std::filesystem::path& content_out,
                             const std::filesystem::path& timbre_out);

AudioClip external_decode(const CodecBackend& backend,
                          const std::filesystem::path& content_in,
                          const std::filesystem::path& timbre_in,
                          const std::filesystem::path& out_wav);

/// Dispatches on the backend kind. External calls keep their files in
/// `scratch`, which must exist.
BackendEncoding backend_encode(const CodecBackend& backend, const AudioClip& clip,
                               const std::filesystem::path& scratch);
AudioClip backend_decode(const CodecBackend& backend, const ContentHandle& content,
                         const TimbreVector& timbre,
                         const std::filesystem::path& scratch);

}  // namespace voicemix
