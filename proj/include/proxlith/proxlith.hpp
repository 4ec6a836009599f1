#pragma once

#include "proxlith/fft.hpp"
#include "proxlith/geometry.hpp"
#include "proxlith/grid.hpp"
#include "proxlith/grid_io.hpp"
#include "proxlith/harness.hpp"
#include "proxlith/hash.hpp"
#include "proxlith/layout.hpp"
#include "proxlith/metrology.hpp"
#include "proxlith/parallel.hpp"
#include "proxlith/process.hpp"
#include "proxlith/raster.hpp"
#include "proxlith/recipe.hpp"
#include "proxlith/resist.hpp"
#include "proxlith/wave_optics.hpp"
