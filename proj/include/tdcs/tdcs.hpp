#pragma once

#include <tdcs/allocation.hpp>
#include <tdcs/channel.hpp>
#include <tdcs/error.hpp>
#include <tdcs/fft.hpp>
#include <tdcs/receiver.hpp>
#include <tdcs/rng.hpp>
#include <tdcs/scenario.hpp>
#include <tdcs/seqcore.hpp>
#include <tdcs/signal.hpp>
#include <tdcs/simharness.hpp>
#include <tdcs/spectrum.hpp>
#include <tdcs/waveform.hpp>
