#pragma once

// Umbrella header.

#include "tulukit/dataset.hpp"
#include "tulukit/datagen.hpp"
#include "tulukit/errors.hpp"
#include "tulukit/gateway.hpp"
#include "tulukit/grammar_check.hpp"
#include "tulukit/grammar_pack.hpp"
#include "tulukit/harness.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/language_pack.hpp"
#include "tulukit/prompt.hpp"
#include "tulukit/purity.hpp"
#include "tulukit/report_io.hpp"
#include "tulukit/rng.hpp"
#include "tulukit/stats.hpp"
#include "tulukit/token_counter.hpp"
#include "tulukit/transliterator.hpp"
#include "tulukit/unicode.hpp"
