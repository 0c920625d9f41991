#pragma once

#include "bregsel/error.hpp"
#include "bregsel/montecarlo.hpp"
#include "bregsel/sample.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace bregsel::cli {

//! Exit codes shared by all subcommands (decision codes 0/1/2 are per command).
enum ExitCode : int
{
  kExitUsage = 64,
  kExitDataError = 65,
  kExitNoInput = 66,
  kExitSoftware = 70,
  kExitCantCreate = 73,
};

//! A dataset token that is not a decimal number.
class ParseError : public Error
{
public:
  ParseError(std::size_t line, std::size_t column, std::size_t token, const std::string& text);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  //! 1-based index of the offending token within the whole input.
  std::size_t token() const noexcept { return token_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::size_t token_;
};

class InputNotFoundError : public Error
{
public:
  using Error::Error;
};

class UsageError : public Error
{
public:
  using Error::Error;
};

//! Whitespace/comma separated decimals; lines whose first non-blank
//! character is '#' are ignored.
Sample parse_dataset(std::istream& in, const std::string& label);

//! `path` of "-" reads `stdin_stream`.
Sample read_dataset(const std::string& path, std::istream& stdin_stream);

//! Writes `content` to a sibling temporary file, then renames it over `path`.
void write_atomically(const std::string& path, const std::string& content);

//! Simulation rows as CSV with a header and 17 significant digits.
std::string simulation_csv(const std::vector<TableRow>& rows);

//! Reads back simulation_csv output.
std::vector<TableRow> parse_simulation_csv(std::istream& in);

//! Entry point; args[0] is the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace bregsel::cli
