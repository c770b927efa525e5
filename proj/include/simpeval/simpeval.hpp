#pragma once

#include "simpeval/corpus.hpp"
#include "simpeval/diagnostics.hpp"
#include "simpeval/embed.hpp"
#include "simpeval/entropy.hpp"
#include "simpeval/error.hpp"
#include "simpeval/harness.hpp"
#include "simpeval/ngram.hpp"
#include "simpeval/provider.hpp"
#include "simpeval/suffix_index.hpp"
#include "simpeval/textcore.hpp"
