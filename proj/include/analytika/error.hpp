#pragma once

#include <stdexcept>
#include <string>

namespace analytika {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ArchiveErrc { MalformedArchive, EntryNotFound, DecompressionError, SizeMismatch };

class ArchiveError : public Error {
public:
    ArchiveError(ArchiveErrc code, const std::string& what) : Error(what), code_(code) {}
    ArchiveErrc code() const noexcept { return code_; }

private:
    ArchiveErrc code_;
};

enum class ManifestErrc { MalformedManifest, MissingPackageName };

class ManifestError : public Error {
public:
    ManifestError(ManifestErrc code, const std::string& what) : Error(what), code_(code) {}
    ManifestErrc code() const noexcept { return code_; }

private:
    ManifestErrc code_;
};

enum class DexErrc { MalformedDex, InvalidSpec };

class DexError : public Error {
public:
    DexError(DexErrc code, const std::string& what) : Error(what), code_(code) {}
    DexErrc code() const noexcept { return code_; }

private:
    DexErrc code_;
};

class PatternParseError : public Error {
public:
    PatternParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class FetchErrc { NetworkError, HashMismatch, HttpStatus };

class FetchError : public Error {
public:
    FetchError(FetchErrc code, const std::string& what, int http_status = 0)
        : Error(what), code_(code), http_status_(http_status) {}
    FetchErrc code() const noexcept { return code_; }
    int http_status() const noexcept { return http_status_; }

private:
    FetchErrc code_;
    int http_status_;
};

enum class CorpusErrc { IoError, DuplicateSha256, ParseError };

class CorpusError : public Error {
public:
    CorpusError(CorpusErrc code, const std::string& what) : Error(what), code_(code) {}
    CorpusErrc code() const noexcept { return code_; }

private:
    CorpusErrc code_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Output directory cannot be written; aborts a corpus run.
class FatalIoError : public Error {
public:
    using Error::Error;
};

// Raised from inside a stage when the analysis deadline has passed.
class Cancelled : public Error {
public:
    Cancelled() : Error("analysis deadline exceeded") {}
};

}  // namespace analytika
