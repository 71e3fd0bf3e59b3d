from .libcloud_driver import ArtifactStorage
