#ifndef NAT_SYNTH_HPP
#define NAT_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "nat/corpus.hpp"
#include "nat/pipeline.hpp"

namespace nat {

// Demo/test corpus machinery: gazetteers for the five entity types and a
// templated corpus generator (filler words around gazetteer phrases).

std::vector<Gazetteer> demo_gazetteers();

Corpus synth_corpus(std::size_t segments, std::uint64_t seed);

}  // namespace nat

#endif  // NAT_SYNTH_HPP
