#pragma once

#include <functional>
#include <string>

#include "homog/config.hpp"

namespace homog {

/// Run one experiment subcommand against a parsed config. Writes CSV
/// artifacts into out_dir (created if missing) and returns the process exit
/// code. jobs > 1 parallelizes independent items; results are reduced in
/// fixed list order so the worker count never changes the numbers.
int run_subcommand(const std::string& name, const Config& cfg, int jobs,
                   const std::string& out_dir);

/// Fixed-order parallel map: fn(i) for i in [0, n), at most `jobs` at a time.
/// The first exception wins and is rethrown after all workers stop.
void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace homog
