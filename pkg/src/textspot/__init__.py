"""End-to-end text spotting: proposal, detection and recognition heads over a
shared convolutional feature map, trained jointly with a minimal autodiff engine.
"""

import os

# Pin BLAS worker counts before numpy first loads, both to keep runs on the
# promised single core and to make reduction order (and therefore every
# forward pass) bit-identical across runs.  TXSPOT_THREADS raises the cap.
_threads = os.environ.get("TXSPOT_THREADS", "1")
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
    os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"
