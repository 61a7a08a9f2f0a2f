#pragma once

#include <afrelay/channel.hpp>
#include <afrelay/relay_optim.hpp>
#include <afrelay/capacity.hpp>
#include <afrelay/duality.hpp>
#include <afrelay/multihop.hpp>
#include <afrelay/oracle.hpp>
#include <afrelay/io.hpp>
