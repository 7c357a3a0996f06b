#pragma once

#include "qenv/core.hpp"
#include "qenv/penalties.hpp"
#include "qenv/fbs.hpp"
#include "qenv/subsets.hpp"
#include "qenv/certificates.hpp"
#include "qenv/io.hpp"
#include "qenv/experiments.hpp"
