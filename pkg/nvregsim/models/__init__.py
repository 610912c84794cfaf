from nvregsim.models.run_record import RunRecord

__all__ = ['RunRecord']
