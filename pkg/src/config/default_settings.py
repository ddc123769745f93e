"""
Default settings for the bridge laboratory.
These settings are used when no override file is given and no flag overrides a value.
The values are the field defaults of the validated settings models.
"""

from src.models.config import LabSettings

DEFAULT_SETTINGS = LabSettings().model_dump()
