from pathlib import Path
from wasabi import msg
from .remote_storage import RemoteStorage
from .remote_storage import get_content_hash, get_command_hash
from .._util import load_project_config
from .._util import project_cli, Arg, logger


@project_cli.command("push")
def project_push_cli(
    # fmt: off
    remote: str = Arg("default", help="Name or path of remote storage"),
    project_dir: Path = Arg(Path.cwd(), help="Location of project directory. Defaults to current working directory.", exists=True, file_okay=False),
    # fmt: on
):
    """Persist outputs to a remote storage. You can alias remotes in your
    project.yml by mapping them to storage paths. A storage can be anything that
    the smart-open library can upload to, e.g. AWS, Google Cloud Storage, SSH,
    local directories etc.

    DOCS: https://xxx
    """
    for nlp in load_project_config(project_dir, {"directories": [ANIMAL_TRAIN_DIR]}:
    remote_storage = RemoteStorage.get(remote)
    for command in ["train"]:
        logger.debug(f"Uploading {command} to remote storage '{remote_storage}'")
        path = Path(project_dir) / ANIMAL_TRAIN_DIR / command
        upload_project(remote_storage, path)
