import os
import re
import logging

from libcloud.storage.types import (
    ObjectError,
    ContainerDoesNotExistError,
    InvalidContainerNameError,
)
from libcloud.storage.providers import get_driver
from natsort import natsorted

logger = logging.getLogger(__name__)

# ${NAME} placeholder, unless written as \${NAME}
ENV_PLACEHOLDER = re.compile(r'(?<!\\)\$\{([^}]+)}')


def substitute_env(value, arg_name):
    """
    Replaces `${VAR}` placeholders in a driver argument with the value of
    environment variable VAR (surrounding quotes stripped); `\\${` is
    unescaped to a literal `${`.

    Raises
    ------
    ValueError
        If a referenced environment variable is not set.
    """
    def lookup(match):
        env_var = match.group(1)
        env_value = os.getenv(env_var)
        if env_value is None:
            logger.error(f"Environment variable '{env_var}' is not set for storage argument '{arg_name}'.")
            raise ValueError(f"Environment variable '{env_var}' is not set for storage argument '{arg_name}'.")
        return env_value.strip().strip('"').strip("'")

    return ENV_PLACEHOLDER.sub(lookup, str(value)).replace(r'\${', '${')


class ArtifactStorage:
    """
    Uploads the files of a run (checkpoint, training logs, reports) into an
    object storage container through Apache Libcloud.

    Objects are named `<prefix><path relative to the run directory>` and are
    never overwritten: a file whose object name already exists is skipped.
    Upload problems are logged and reported as "not uploaded", so a failing
    bucket never fails the run that produced the files.

    Attributes
    ----------
    driver : libcloud.storage.base.StorageDriver
        Driver of the configured provider.
    """

    def __init__(self, storage, driver=None):
        """
        Parameters
        ----------
        storage : dict
            The `storage` config section: `provider`, `container_name`,
            optional `prefix` and driver `args`.
        driver : libcloud.storage.base.StorageDriver, optional
            Ready driver, used instead of one built from `provider`.

        Raises
        ------
        ValueError
            Provider or container name missing, or an argument refers to an
            unset environment variable.
        """
        self._provider = storage.get('provider')
        self._container_name = storage.get('container_name')
        for key, value in (('provider', self._provider), ('container_name', self._container_name)):
            if not value:
                logger.error(f"Storage '{key}' is not set in the configuration.")
                raise ValueError(f"Storage '{key}' is not set")
        self._prefix = storage.get('prefix') or ''
        self.driver = driver if driver is not None else self._create_driver(storage.get('args') or {})

    def _create_driver(self, args):
        kwargs = {arg: substitute_env(value, arg) for arg, value in args.items()}
        try:
            driver = get_driver(self._provider)(**kwargs)
        except Exception as e:
            logger.exception(f"Failed to initialize driver for storage provider '{self._provider}': {e}")
            raise
        logger.info(f"Initialized driver for storage provider '{self._provider}'.")
        return driver

    def object_name(self, local_path, relative_to=None):
        name = os.path.relpath(local_path, relative_to) if relative_to else os.path.basename(local_path)
        return self._prefix + name.replace(os.sep, '/')

    def _list_names(self, prefix):
        container = self.driver.get_container(container_name=self._container_name)
        return {obj.name for obj in self.driver.list_container_objects(container=container, prefix=prefix)}

    def object_exists(self, object_name):
        """True if an object of exactly this name exists; a failed lookup
        is logged and counts as absent."""
        try:
            return object_name in self._list_names(object_name)
        except ContainerDoesNotExistError:
            logger.error(f"Container '{self._container_name}' does not exist in the cloud storage.")
        except InvalidContainerNameError:
            logger.error(f"Invalid container name '{self._container_name}'.")
        except Exception as e:
            logger.exception(f"Looking up '{object_name}' in '{self._container_name}' failed: {e}")
        return False

    def upload_file(self, local_path, relative_to=None):
        """Uploads one file unless its object already exists; returns True
        when it was uploaded."""
        object_name = self.object_name(local_path, relative_to)
        if self.object_exists(object_name):
            logger.info(f"'{object_name}' already exists in '{self._container_name}', skipping.")
            return False
        try:
            container = self.driver.get_container(container_name=self._container_name)
            self.driver.upload_object(local_path, container, object_name, extra=None, verify_hash=False, headers=None)
        except (ObjectError, ContainerDoesNotExistError, InvalidContainerNameError) as e:
            logger.exception(f"Error uploading '{object_name}': {e}")
            return False
        except Exception as e:
            logger.exception(f"Unexpected error uploading '{object_name}': {e}")
            return False
        logger.info(f"Uploaded '{object_name}' to container '{self._container_name}'.")
        return True

    def upload_run(self, paths, relative_to=None):
        """Uploads `paths` in natural order (level_2 before level_10) and
        returns the object names that were uploaded."""
        uploaded = [self.object_name(path, relative_to) for path in natsorted(paths)
                    if self.upload_file(path, relative_to)]
        logger.info(f"Uploaded {len(uploaded)} of {len(paths)} run files to '{self._container_name}'.")
        return uploaded
