#pragma once

#include "raplyr/corpus.hpp"
#include "raplyr/error.hpp"
#include "raplyr/eval.hpp"
#include "raplyr/generator.hpp"
#include "raplyr/lexicon.hpp"
#include "raplyr/ngram.hpp"
#include "raplyr/rational.hpp"
#include "raplyr/records.hpp"
#include "raplyr/rhyme.hpp"
#include "raplyr/scoring.hpp"
