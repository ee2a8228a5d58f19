"""Allow ``python -m bos_spectrum``."""
from .cli import main

raise SystemExit(main())
