from .manager import SweepManager
from .models import JobStatus, SweepJob

__all__ = ["JobStatus", "SweepJob", "SweepManager"]
