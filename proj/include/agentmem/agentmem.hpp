#pragma once

// Everything except the HTTP embedding client (remote_embedder.hpp), which pulls in
// cpp-httplib and needs a threads library at link time.

#include "config.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "frequency_sketch.hpp"
#include "policy.hpp"
#include "prompt_builder.hpp"
#include "scene_graph.hpp"
#include "short_term_memory.hpp"
#include "workload.hpp"
