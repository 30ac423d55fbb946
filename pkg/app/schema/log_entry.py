"""
Log entry schema definition.
"""

from datetime import datetime

from pydantic import BaseModel, ConfigDict, Field, field_serializer


class LogEntry(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    asctime: datetime = Field(..., description="Timestamp of the log entry")
    levelname: str = Field(..., description="Log level name")
    run_id: str = Field("", description="ULID of the CLI invocation or MCP tool call")
    command: str = Field("", description="CLI subcommand or MCP tool that emitted the record")
    logger: str = Field("", description="Module that emitted the record")
    message: str = Field(..., description="Log message, truncated to LOG_MESSAGE_MAX_LEN")

    @field_serializer("asctime")
    def serialize_asctime(self, asctime: datetime) -> str:
        return asctime.strftime(r"%Y-%m-%d %H:%M:%S,%f")[:-3]
