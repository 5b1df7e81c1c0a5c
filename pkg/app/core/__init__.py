from .config import get_settings
from .exceptions import GlmSelectionError
