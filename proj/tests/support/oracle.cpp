#include "support/oracle.hpp"
