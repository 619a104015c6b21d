#pragma once

// Single place that configures cpp-httplib so every translation unit sees
// the same feature set.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
