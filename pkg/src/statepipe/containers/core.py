"""Core services container for Statepipe."""

from dependency_injector import containers, providers

from statepipe.core.manifest import ManifestStore, manifest_path
from statepipe.utils.hash_generator import HashGenerator


class CoreContainer(containers.DeclarativeContainer):
    """Container for hashing and the work-directory manifest."""

    config = providers.Configuration()

    hash_generator: providers.Singleton[HashGenerator] = providers.Singleton(HashGenerator)

    manifest_store: providers.Singleton[ManifestStore] = providers.Singleton(
        ManifestStore,
        path=providers.Callable(manifest_path, config.work_dir),
        hash_generator=hash_generator,
    )
