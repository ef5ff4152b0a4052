"""Backend selection for the diagonal partner-pairing kernels.

The compiled extension is used when it was built; set ``HBACQEC_PURE_PYTHON=1``
to force the NumPy fallback.
"""

import os

from . import _ppa_py

if os.environ.get("HBACQEC_PURE_PYTHON"):
    _impl = _ppa_py
else:
    try:
        from . import _ppa_ext as _impl
    except ImportError:
        _impl = _ppa_py

BACKEND = _impl.BACKEND
sort_order = _impl.sort_order
exchange_diag = _impl.exchange_diag
depolarize_diag = _impl.depolarize_diag
ppa_diag = _impl.ppa_diag

python = _ppa_py
