#include <future>
#include <optional>

#include "specwb/io.hpp"

namespace specwb {

ChunkPlan planChunks(std::size_t lines, std::size_t target_bytes, std::size_t row_bytes) {
    if (lines < 1 || target_bytes < 1 || row_bytes < 1) throw Error("planChunks: all arguments must be >= 1");
    const std::size_t rows = std::max<std::size_t>(1, (target_bytes + row_bytes - 1) / row_bytes);
    ChunkPlan plan;
    for (std::size_t offset = 0; offset < lines; offset += rows) {
        plan.row_offsets.push_back(offset);
        plan.rows_per_chunk.push_back(std::min(rows, lines - offset));
    }
    return plan;
}

namespace {

Matrix kernelMatrix(KernelOutput out) {
    if (auto* s = std::get_if<Speclib>(&out)) return s->spectra();
    return std::get<Matrix>(std::move(out));
}

void validatePlan(const ChunkPlan& plan, std::size_t lines) {
    if (plan.row_offsets.size() != plan.rows_per_chunk.size()) throw Error("chunk plan is malformed");
    std::size_t next = 0;
    for (std::size_t k = 0; k < plan.n(); ++k) {
        if (plan.row_offsets[k] != next || plan.rows_per_chunk[k] == 0)
            throw Error("chunk plan does not partition the image rows");
        next += plan.rows_per_chunk[k];
    }
    if (next != lines) throw Error("chunk plan covers " + std::to_string(next) + " of " + std::to_string(lines) + " rows");
}

}  // namespace

ChunkRunStats processChunked(EnviCubeReader& reader, EnviCubeWriter& writer, const Kernel& kernel,
                             const ChunkPlan& plan, unsigned threads) {
    const EnviHeader& in = reader.header();
    if (writer.header().samples != in.samples || writer.header().lines != in.lines)
        throw Error("output cube dimensions differ from the input cube");
    validatePlan(plan, in.lines);

    ChunkRunStats stats;
    std::size_t alive = 0;
    const auto policy = threads > 1 ? std::launch::async : std::launch::deferred;

    struct InFlight {
        std::size_t chunk;
        std::size_t rows;
        std::future<Matrix> result;
    };
    std::optional<InFlight> pending;

    auto drain = [&] {
        Matrix out = pending->result.get();
        if (static_cast<std::size_t>(out.rows()) != pending->rows) {
            throw Error("kernel returned " + std::to_string(out.rows()) + " rows for a block of " +
                        std::to_string(pending->rows) + " spectra");
        }
        writer.writeLines(plan.row_offsets[pending->chunk], out);
        pending.reset();
        --alive;
    };

    try {
        for (std::size_t k = 0; k < plan.n(); ++k) {
            auto block = std::make_shared<Speclib>(reader.readLines(plan.row_offsets[k], plan.rows_per_chunk[k]));
            ++alive;
            stats.peak_chunks_in_memory = std::max(stats.peak_chunks_in_memory, alive);
            const std::size_t rows = block->samples();
            std::future<Matrix> fut =
                std::async(policy, [block, &kernel]() mutable {
                    Matrix m = kernelMatrix(kernel(*block));
                    block.reset();
                    return m;
                });
            if (pending) drain();
            pending = InFlight{k, rows, std::move(fut)};
            ++stats.chunks;
        }
        if (pending) drain();
        writer.finish();
    } catch (...) {
        writer.abandon();
        if (pending && pending->result.valid()) pending->result.wait();
        throw;
    }
    return stats;
}

}  // namespace specwb
