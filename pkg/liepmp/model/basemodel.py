import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class Document(BaseModel):
    """Base for documents read from JSON; members of discriminated unions derive from this"""

    model_config = ConfigDict(frozen=True, extra="forbid")


class Report(Document):
    """Base for everything written to JSON, accepting numpy values on construction"""

    @field_validator("*", mode="before")
    def numpy_to_builtin(cls, value):
        if isinstance(value, np.ndarray):
            return value.tolist()
        if isinstance(value, np.generic):
            return value.item()
        return value
