#include "ceilab/learner/replay.hpp"
